"""Learner specifications, the trained-model interface and weight checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

import numpy as np

from ..data import Dataset, Schema
from ..errors import DegenerateClassError, DegenerateWeightsError, SchemaMismatchError

KINDS = ("mlp", "tree_c45", "knn5", "random_forest", "ripper", "naive_bayes")

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "mlp": {"hidden": None, "learning_rate": 0.3, "momentum": 0.2, "epochs": 500},
    "tree_c45": {"min_leaf": 2.0, "confidence": 0.25, "prune": True},
    "knn5": {"k": 5},
    "random_forest": {"n_trees": 50, "max_features": None, "min_leaf": 1.0},
    "ripper": {"grow_fraction": 2.0 / 3.0, "max_rules": 100, "max_conditions": 20},
    "naive_bayes": {},
}

# learners whose weight use reduces to weighted counts
COUNT_BASED = ("tree_c45", "knn5", "ripper", "naive_bayes")


def _validate(kind: str, p: Mapping[str, Any]) -> None:
    def positive_int(name):
        v = p[name]
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            raise ValueError(f"{kind}: {name} must be an integer >= 1, got {v!r}")

    if kind == "mlp":
        positive_int("epochs")
        if p["hidden"] is not None:
            positive_int("hidden")
        if not p["learning_rate"] > 0:
            raise ValueError("mlp: learning_rate must be positive")
        if not 0 <= p["momentum"] < 1:
            raise ValueError("mlp: momentum must lie in [0, 1)")
    elif kind == "tree_c45":
        if not p["min_leaf"] > 0:
            raise ValueError("tree_c45: min_leaf must be positive")
        if not 0 < p["confidence"] <= 0.5:
            raise ValueError("tree_c45: confidence must lie in (0, 0.5]")
    elif kind == "knn5":
        positive_int("k")
    elif kind == "random_forest":
        positive_int("n_trees")
        if p["max_features"] is not None:
            positive_int("max_features")
        if not p["min_leaf"] > 0:
            raise ValueError("random_forest: min_leaf must be positive")
    elif kind == "ripper":
        if not 0 < p["grow_fraction"] < 1:
            raise ValueError("ripper: grow_fraction must lie in (0, 1)")
        positive_int("max_rules")
        positive_int("max_conditions")


@dataclass(frozen=True)
class LearnerSpec:
    """A learner kind, its hyperparameter overrides and its seed."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"{self.kind}: unknown hyperparameters {sorted(unknown)}")
        object.__setattr__(self, "params", dict(self.params))
        _validate(self.kind, self.hyper)

    @property
    def hyper(self) -> dict[str, Any]:
        merged = dict(DEFAULT_PARAMS[self.kind])
        merged.update(self.params)
        return merged

    def key(self) -> tuple:
        return (self.kind, tuple(sorted(self.hyper.items())))

    def with_seed(self, seed: int) -> "LearnerSpec":
        return LearnerSpec(self.kind, self.params, seed)

    def __hash__(self):
        return hash((self.key(), self.seed))

    def __eq__(self, other):
        if not isinstance(other, LearnerSpec):
            return NotImplemented
        return self.key() == other.key() and self.seed == other.seed

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "LearnerSpec":
        if isinstance(d, str):
            return cls(d)
        return cls(d["kind"], d.get("params", {}) or {}, int(d.get("seed", 0)))


def check_weights(weights, d: Dataset) -> Optional[np.ndarray]:
    """Validate a weight vector against ``d``; ``None`` means unweighted.

    Raises on all-zero weights or when fewer than two classes keep positive
    weight.
    """
    if weights is None:
        if len(np.unique(d.y)) < 2:
            raise DegenerateClassError("training data holds a single class")
        return None
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(d),):
        raise ValueError(f"weight vector length {w.shape} does not match dataset size {len(d)}")
    if not np.all(np.isfinite(w)) or w.min(initial=0.0) < 0 or w.max(initial=0.0) > 1:
        raise ValueError("weights must lie in [0, 1]")
    if not np.any(w > 0):
        raise DegenerateWeightsError("all instance weights are zero")
    mass = np.bincount(d.y, weights=w, minlength=d.n_classes)
    if np.count_nonzero(mass > 0) < 2:
        raise DegenerateClassError("fewer than two classes carry positive weight")
    return w


def positive_part(d: Dataset, w: Optional[np.ndarray]):
    """Drop zero-weight instances and rescale the rest to unit mean weight.

    Returns ``(X, y, w)``. With all-ones weights the rescale factor is exactly
    1, so the result is bit-identical to the unweighted path.
    """
    if w is None:
        return d.X, d.y, np.ones(len(d))
    keep = w > 0
    wk = w[keep]
    factor = np.count_nonzero(keep) / wk.sum()
    return d.X[keep], d.y[keep], wk * factor


class Model:
    """A trained hypothesis.

    Subclasses implement ``class_scores`` returning an ``(n, Y)`` matrix of
    confidences in ``[0, 1]``; ``predict`` is the row-wise argmax with ties
    going to the lowest class index.
    """

    kind: str = ""

    def __init__(self, spec, schema: Schema, fingerprint: str):
        self.spec = spec
        self.schema = schema
        self.fingerprint = fingerprint

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    @property
    def provenance(self) -> tuple:
        return (self.spec, self.fingerprint)

    def _check_X(self, X) -> np.ndarray:
        if isinstance(X, Dataset):
            if X.schema.attributes != self.schema.attributes:
                raise SchemaMismatchError("dataset schema differs from the training schema")
            return X.X
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.schema.n_features:
            raise SchemaMismatchError(
                f"expected {self.schema.n_features} features, got shape {X.shape}"
            )
        for j, a in enumerate(self.schema.attributes):
            if a.is_nominal:
                col = X[:, j]
                col = col[~np.isnan(col)]
                if col.size and (col.min() < 0 or col.max() >= len(a.values)):
                    raise SchemaMismatchError(f"nominal index out of range for {a.name!r}")
        return X

    def class_scores(self, X) -> np.ndarray:
        return self._scores(self._check_X(X))

    def _scores(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.class_scores(X), axis=1)

    def state_dict(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_state(cls, spec, schema, fingerprint, state) -> "Model":
        raise NotImplementedError


def uniform_scores(n: int, Y: int) -> np.ndarray:
    return np.full((n, Y), 1.0 / Y)


def normalize_rows(M: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    s = M.sum(axis=1, keepdims=True)
    out = np.empty_like(M, dtype=np.float64)
    good = s[:, 0] >= eps
    out[good] = M[good] / s[good]
    out[~good] = 1.0 / M.shape[1]
    return out


def default_hidden(n_inputs: int, n_classes: int) -> int:
    return max(2, math.ceil((n_inputs + n_classes) / 2))
