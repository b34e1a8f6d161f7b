"""Weighted k-nearest-neighbour voting under the HEOM distance."""

import numpy as np

from .. import kernels
from .base import Model
from .preprocess import Preprocessor


def nearest(D: np.ndarray, k: int) -> np.ndarray:
    """Column indices of the ``k`` smallest entries per row; ties by index."""
    k = min(k, D.shape[1])
    return np.argsort(D, axis=1, kind="stable")[:, :k]


class KNNModel(Model):
    """Lazy model: stores the (imputed) training set and instance weights.

    Zero-weight instances still occupy neighbour slots; they just carry no
    vote mass.
    """

    kind = "knn5"

    def __init__(self, spec, schema, fingerprint, prep, Z, y, w):
        super().__init__(spec, schema, fingerprint)
        self.prep = prep
        self.Z = Z
        self.y = np.asarray(y, dtype=np.int64)
        self.w = w

    @classmethod
    def fit(cls, spec, d, w):
        rows = w > 0 if w is not None else np.ones(len(d), dtype=bool)
        prep = Preprocessor.fit(d.schema, d.X[rows])
        return cls(spec, d.schema, d.fingerprint(), prep, prep.impute(d.X), d.y.copy(),
                   None if w is None else np.asarray(w, dtype=np.float64).copy())

    @property
    def k(self) -> int:
        return self.spec.hyper["k"]

    def distances(self, X) -> np.ndarray:
        Q = self.prep.impute(X)
        return kernels.heom_distances(Q, self.Z, self.prep.nominal, self.prep.ranges)

    def vote_mass(self, X) -> np.ndarray:
        """Per-class weight mass among each row's k nearest stored instances."""
        X = self._check_X(X)
        return self._mass(X)

    def _mass(self, X):
        nn = nearest(self.distances(X), self.k)
        labels = self.y[nn]
        Y = self.n_classes
        mass = np.zeros((X.shape[0], Y))
        rows = np.repeat(np.arange(X.shape[0]), nn.shape[1])
        if self.w is None:
            np.add.at(mass, (rows, labels.ravel()), 1.0)
        else:
            np.add.at(mass, (rows, labels.ravel()), self.w[nn].ravel())
        return mass

    def _scores(self, X):
        mass = self._mass(X)
        total = mass.sum(axis=1, keepdims=True)
        out = np.full_like(mass, 1.0 / self.n_classes)
        good = total[:, 0] > 0
        out[good] = mass[good] / total[good]
        return out

    def state_dict(self):
        return {
            "prep": self.prep.state(),
            "Z": self.Z.tolist(),
            "y": self.y.tolist(),
            "w": None if self.w is None else self.w.tolist(),
        }

    @classmethod
    def from_state(cls, spec, schema, fingerprint, s):
        Z = np.asarray(s["Z"], dtype=np.float64).reshape(len(s["y"]), schema.n_features)
        w = None if s["w"] is None else np.asarray(s["w"], dtype=np.float64)
        return cls(spec, schema, fingerprint, Preprocessor.from_state(s["prep"]), Z, s["y"], w)
