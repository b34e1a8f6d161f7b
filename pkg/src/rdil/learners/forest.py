"""Random forest of unpruned random trees with weight-proportional bootstraps."""

import math

import numpy as np

from .base import Model, normalize_rows
from .preprocess import Preprocessor
from .trees import Node, TreeBuilder, leaf_distributions


def bootstrap_indices(rng, n, w=None):
    """Draw ``n`` row indices, uniformly or proportionally to ``w``.

    Both cases consume the same uniforms and, for all-equal weights, return
    identical indices: the weighted draw inverts the cumulative weight at
    ``u * total``, which for unit weights is exactly ``floor(u * n)``.
    Zero-weight rows are never drawn.
    """
    u = rng.random(n)
    if w is None:
        return np.minimum(np.floor(u * n).astype(np.int64), n - 1)
    cum = np.cumsum(w)
    idx = np.searchsorted(cum, u * cum[-1], side="right")
    return np.minimum(idx, n - 1)


class ForestModel(Model):
    kind = "random_forest"

    def __init__(self, spec, schema, fingerprint, prep, trees):
        super().__init__(spec, schema, fingerprint)
        self.prep = prep
        self.trees = trees

    @classmethod
    def fit(cls, spec, d, w, record_samples=False):
        hp = spec.hyper
        rows = w > 0 if w is not None else np.ones(len(d), dtype=bool)
        prep = Preprocessor.fit(d.schema, d.X[rows])
        Z = prep.impute(d.X)
        n, F = Z.shape
        k = hp["max_features"] or max(1, math.ceil(math.sqrt(F)))
        rng = np.random.default_rng(spec.seed)
        trees = []
        samples = []
        for _ in range(hp["n_trees"]):
            idx = bootstrap_indices(rng, n, w)
            tree_seed = int(rng.integers(2**63 - 1))
            mult = np.bincount(idx, minlength=n).astype(np.float64)
            used = np.flatnonzero(mult)
            builder = TreeBuilder(prep.nominal, prep.n_values, d.n_classes, float(hp["min_leaf"]),
                                  criterion="gain", max_features=k,
                                  rng=np.random.default_rng(tree_seed))
            trees.append(builder.build(Z[used], d.y[used], mult[used]))
            if record_samples:
                samples.append(idx)
        model = cls(spec, d.schema, d.fingerprint(), prep, trees)
        if record_samples:
            model.bootstrap_samples = samples
        return model

    def _scores(self, X):
        Z = self.prep.impute(X)
        total = np.zeros((X.shape[0], self.n_classes))
        for t in self.trees:
            total += leaf_distributions(t, Z)
        return normalize_rows(total)

    def state_dict(self):
        return {"prep": self.prep.state(), "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_state(cls, spec, schema, fingerprint, s):
        return cls(spec, schema, fingerprint, Preprocessor.from_state(s["prep"]),
                   [Node.from_dict(t) for t in s["trees"]])
