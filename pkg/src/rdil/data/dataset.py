"""Core dataset types.

Features live in a dense float matrix: numeric attributes hold their value,
nominal attributes hold the index into their value list, and missing entries
are NaN. Labels are integer class indices.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class Attribute:
    name: str
    values: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.values is not None:
            object.__setattr__(self, "values", tuple(self.values))
            if len(set(self.values)) != len(self.values):
                raise ValueError(f"attribute {self.name!r} has duplicate nominal values")

    @property
    def is_nominal(self) -> bool:
        return self.values is not None

    @property
    def is_numeric(self) -> bool:
        return self.values is None

    @classmethod
    def numeric(cls, name: str) -> "Attribute":
        return cls(name, None)

    @classmethod
    def nominal(cls, name: str, values: Sequence[str]) -> "Attribute":
        return cls(name, tuple(values))


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]
    class_attribute: Attribute
    relation: str = "data"

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.class_attribute.is_nominal:
            raise ValueError("class attribute must be nominal")
        if not self.class_attribute.values:
            raise ValueError("class attribute needs at least one value")

    @property
    def n_classes(self) -> int:
        return len(self.class_attribute.values)

    @property
    def n_features(self) -> int:
        return len(self.attributes)

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.class_attribute.values

    @property
    def nominal_mask(self) -> np.ndarray:
        return np.array([a.is_nominal for a in self.attributes], dtype=bool)

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        for a in self.attributes + (self.class_attribute,):
            h.update(repr((a.name, a.values)).encode())
        return h.hexdigest()[:16]


class Instance(NamedTuple):
    id: int
    x: np.ndarray
    label: int


class Dataset:
    """Immutable labelled instances sharing one schema. Ids are ``0..N-1``."""

    __slots__ = ("schema", "X", "y")

    def __init__(self, schema: Schema, X, y):
        X = np.array(X, dtype=np.float64, copy=True)
        y = np.array(y, dtype=np.int64, copy=True)
        if X.ndim == 1 and schema.n_features == 0:
            X = X.reshape(len(y), 0)
        if X.ndim != 2 or X.shape[1] != schema.n_features:
            raise ValueError(
                f"feature matrix shape {X.shape} does not match {schema.n_features} attributes"
            )
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise ValueError("label vector length must equal instance count")
        if len(y) and (y.min() < 0 or y.max() >= schema.n_classes):
            raise ValueError("label index out of range")
        for j, attr in enumerate(schema.attributes):
            if attr.is_nominal:
                col = X[:, j]
                known = col[~np.isnan(col)]
                if known.size and (
                    known.min() < 0 or known.max() >= len(attr.values) or np.any(known != np.floor(known))
                ):
                    raise ValueError(f"nominal index out of range for attribute {attr.name!r}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    def __reduce__(self):
        return (Dataset, (self.schema, self.X, self.y))

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_instances(self) -> int:
        return len(self.y)

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    @property
    def ids(self) -> np.ndarray:
        return np.arange(len(self.y))

    def instance(self, i: int) -> Instance:
        return Instance(int(i), self.X[i], int(self.y[i]))

    def __iter__(self) -> Iterator[Instance]:
        for i in range(len(self.y)):
            yield self.instance(i)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def subset(self, ids) -> "Dataset":
        """New dataset holding ``ids`` in the given order, renumbered from 0."""
        ids = np.asarray(ids, dtype=np.int64)
        return Dataset(self.schema, self.X[ids], self.y[ids])

    def with_labels(self, y) -> "Dataset":
        return Dataset(self.schema, self.X, y)

    def append(self, other: "Dataset") -> "Dataset":
        if other.schema != self.schema:
            raise ValueError("schemas differ")
        return Dataset(self.schema, np.vstack([self.X, other.X]), np.concatenate([self.y, other.y]))

    def fingerprint(self) -> str:
        h = hashlib.sha1(self.schema.fingerprint().encode())
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X, equal_nan=True)
            and np.array_equal(self.y, other.y)
        )

    def __hash__(self):
        return hash(self.fingerprint())

    def __repr__(self) -> str:
        return (
            f"Dataset({self.schema.relation!r}, n={len(self)}, "
            f"features={self.schema.n_features}, classes={self.n_classes})"
        )


@dataclass(frozen=True)
class CorruptionRecord:
    """Which labels noise injection changed: ``flipped[id] = (original, injected)``."""

    flipped: dict
    rate: float
    seed: int

    def __post_init__(self):
        for i, (orig, new) in self.flipped.items():
            if orig == new:
                raise ValueError(f"instance {i}: injected label equals original")

    @property
    def flipped_ids(self) -> np.ndarray:
        return np.array(sorted(self.flipped), dtype=np.int64)

    def restore(self, noisy: Dataset) -> Dataset:
        """Undo the corruption, recovering the original dataset."""
        y = noisy.y.copy()
        for i, (orig, new) in self.flipped.items():
            if y[i] != new:
                raise ValueError(f"instance {i} does not carry the injected label")
            y[i] = orig
        return noisy.with_labels(y)

    def true_labels(self, noisy: Dataset) -> np.ndarray:
        return self.restore(noisy).y
