"""Cross-validated estimates of p(label | x) for every training instance.

Each member of an ensemble is trained on k - 1 folds and votes on the held
out fold, so no instance is ever judged by a hypothesis that saw it. The
weight of an instance is the mean of its member votes: a 0/1 correctness
indicator under ``delta`` voting or the member's classifier score for the
given label under ``score`` voting.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._seeding import derive_seed
from .data import Dataset, stratified_kfold
from .errors import DegenerateClassError
from .learners import KINDS, LearnerSpec, Model, train

VOTING = ("delta", "score")


def member_names(members: Sequence[LearnerSpec]) -> tuple[str, ...]:
    """Column names for members: the kind, suffixed when a kind repeats."""
    kinds = [m.kind for m in members]
    names = []
    for i, k in enumerate(kinds):
        if kinds.count(k) == 1:
            names.append(k)
        else:
            names.append(f"{k}_{kinds[:i].count(k) + 1}")
    return tuple(names)


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble members, number of CV folds and the fold seed.

    Members must be distinct by kind and hyperparameters. Each member keeps
    its own training seed; ``seed`` fixes the folds shared by all members.
    """

    members: tuple = ()
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        members = tuple(LearnerSpec.from_dict(m) if not isinstance(m, LearnerSpec) else m
                        for m in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ValueError("an ensemble needs at least one member")
        keys = [m.key() for m in members]
        if len(set(keys)) != len(keys):
            raise ValueError("ensemble members must differ in kind or hyperparameters")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")

    @property
    def names(self) -> tuple[str, ...]:
        return member_names(self.members)

    def to_dict(self) -> dict:
        return {"members": [m.to_dict() for m in self.members], "folds": self.folds, "seed": self.seed}

    @classmethod
    def from_dict(cls, d) -> "EnsembleSpec":
        return cls(tuple(d["members"]), int(d.get("folds", 10)), int(d.get("seed", 0)))


def default_ensemble(folds: int = 10, seed: int = 0) -> EnsembleSpec:
    """All six learner kinds with default hyperparameters."""
    members = tuple(LearnerSpec(k, seed=derive_seed(seed, i)) for i, k in enumerate(KINDS))
    return EnsembleSpec(members, folds, seed)


@dataclass
class DetrimentalityEstimate:
    """Per-instance weights together with the votes they average.

    Attributes
    ----------
    weights : (N,) array in [0, 1]
    votes : (N, M) array; NaN marks a member that did not vote on an instance
    members : column names of ``votes``
    voting : ``"delta"``, ``"score"`` or the name of another estimator
    folds : list of (train_ids, test_ids), empty when no CV was run
    fold_of : (N,) fold index that produced each instance's votes
    """

    weights: np.ndarray
    votes: np.ndarray
    members: tuple
    voting: str
    folds: list = field(default_factory=list)
    fold_of: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def n_members(self) -> int:
        return len(self.members)

    def misclassified_fraction(self) -> np.ndarray:
        return 1.0 - self.weights

    def training_ids(self, i: int) -> np.ndarray:
        """Ids used to train the hypotheses that voted on instance ``i``."""
        return self.folds[int(self.fold_of[i])][0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance_id", "weight"] + [f"vote_{m}" for m in self.members])
        for i in range(len(self.weights)):
            row = [i, repr(float(self.weights[i]))]
            row += ["" if math.isnan(v) else repr(float(v)) for v in self.votes[i]]
            w.writerow(row)
        return buf.getvalue()

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str, voting: str = "delta") -> "DetrimentalityEstimate":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:2] != ["instance_id", "weight"]:
            raise ValueError("weight CSV must start with columns instance_id,weight")
        members = tuple(h[len("vote_"):] if h.startswith("vote_") else h for h in rows[0][2:])
        body = [r for r in rows[1:] if r]
        ids = [int(r[0]) for r in body]
        if ids != list(range(len(body))):
            raise ValueError("weight CSV instance ids must be 0..N-1 in order")
        weights = np.array([float(r[1]) for r in body])
        votes = np.array([[float(v) if v != "" else np.nan for v in r[2:]] for r in body],
                         dtype=np.float64).reshape(len(body), len(members))
        return cls(weights, votes, members, voting)


def read_weights(path) -> np.ndarray:
    """Weight column of a CSV written by :meth:`DetrimentalityEstimate.to_csv`."""
    with open(path, encoding="utf-8") as fh:
        return DetrimentalityEstimate.from_csv(fh.read()).weights


def _fold_votes(task):
    member, d, train_ids, test_ids, voting = task
    tr = d.subset(train_ids)
    try:
        model = train(member, tr)
    except DegenerateClassError as exc:
        raise DegenerateClassError(
            f"{member.kind}: training folds hold fewer than two classes ({exc})"
        ) from exc
    X = d.X[test_ids]
    y = d.y[test_ids]
    if voting == "delta":
        return (model.predict(X) == y).astype(np.float64)
    return model.class_scores(X)[np.arange(len(y)), y]


def estimate_ensemble(d: Dataset, spec: Optional[EnsembleSpec] = None, voting: str = "delta",
                      n_jobs: int = 1) -> DetrimentalityEstimate:
    """Average cross-validated member votes into per-instance weights.

    Parameters
    ----------
    d : Dataset
    spec : EnsembleSpec, optional
        Defaults to :func:`default_ensemble`.
    voting : ``"delta"`` or ``"score"``
    n_jobs : int
        Worker processes for the member-by-fold training grid. Results do
        not depend on it.
    """
    if voting not in VOTING:
        raise ValueError(f"voting must be one of {VOTING}")
    spec = spec or default_ensemble()
    folds = stratified_kfold(d, spec.folds, spec.seed)
    fold_of = np.empty(len(d), dtype=np.int64)
    for f, (_, test_ids) in enumerate(folds):
        fold_of[test_ids] = f
    tasks = [(m, d, tr, te, voting) for m in spec.members for tr, te in folds]
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_fold_votes, tasks))
    else:
        results = [_fold_votes(t) for t in tasks]
    M = len(spec.members)
    votes = np.empty((len(d), M))
    it = iter(results)
    for j in range(M):
        for _, test_ids in folds:
            votes[test_ids, j] = next(it)
    weights = votes.mean(axis=1)
    return DetrimentalityEstimate(weights, votes, spec.names, voting, folds, fold_of)


def estimate_biased(d: Dataset, learner, folds: int = 10, voting: str = "delta", seed: int = 0,
                    n_jobs: int = 1) -> DetrimentalityEstimate:
    """Estimate with the single learner that will consume the weights."""
    if isinstance(learner, str):
        learner = LearnerSpec(learner)
    return estimate_ensemble(d, EnsembleSpec((learner,), folds, seed), voting, n_jobs)


def rdil_train(d: Dataset, target, estimator="ensemble", voting: str = "delta", folds: int = 10,
               seed: int = 0, n_jobs: int = 1) -> tuple[Model, DetrimentalityEstimate]:
    """Two passes: estimate weights, then train ``target`` with them.

    ``estimator`` is ``"ensemble"`` (default members), an :class:`EnsembleSpec`,
    or ``"biased"`` to estimate with ``target`` itself.
    """
    if isinstance(target, str):
        target = LearnerSpec(target)
    if isinstance(estimator, EnsembleSpec):
        est = estimate_ensemble(d, estimator, voting, n_jobs)
    elif estimator == "ensemble":
        est = estimate_ensemble(d, default_ensemble(folds, seed), voting, n_jobs)
    elif estimator == "biased":
        est = estimate_biased(d, target, folds, voting, seed, n_jobs)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return train(target, d, est.weights), est
