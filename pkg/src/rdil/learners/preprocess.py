"""Missing-value imputation, range normalization and one-hot encoding.

Statistics are computed once on a training matrix and reused at prediction
time.
"""

import numpy as np


class Preprocessor:
    def __init__(self, nominal, n_values, fill, mins, ranges):
        self.nominal = np.asarray(nominal, dtype=bool)
        self.n_values = np.asarray(n_values, dtype=np.int64)
        self.fill = np.asarray(fill, dtype=np.float64)
        self.mins = np.asarray(mins, dtype=np.float64)
        self.ranges = np.asarray(ranges, dtype=np.float64)

    @classmethod
    def fit(cls, schema, X):
        """Means/modes for imputation and min/range of the imputed columns."""
        nominal = schema.nominal_mask
        n_values = [len(a.values) if a.is_nominal else 0 for a in schema.attributes]
        F = X.shape[1]
        fill = np.zeros(F)
        for j in range(F):
            col = X[:, j]
            known = col[~np.isnan(col)]
            if known.size == 0:
                continue
            if nominal[j]:
                fill[j] = float(np.argmax(np.bincount(known.astype(np.int64), minlength=n_values[j])))
            else:
                fill[j] = float(known.mean())
        imputed = _impute(X, fill)
        if len(imputed):
            mins = imputed.min(axis=0)
            ranges = imputed.max(axis=0) - mins
        else:
            mins = np.zeros(F)
            ranges = np.ones(F)
        ranges = np.where(ranges > 0, ranges, 1.0)
        return cls(nominal, n_values, fill, mins, ranges)

    def impute(self, X):
        return _impute(X, self.fill)

    def scaled(self, X):
        """Imputed matrix with numeric columns mapped to ``(x - min) / range``."""
        Z = self.impute(X)
        num = ~self.nominal
        Z[:, num] = (Z[:, num] - self.mins[num]) / self.ranges[num]
        return Z

    def encoded(self, X):
        """Scaled numerics followed by one-hot blocks for nominal columns."""
        Z = self.scaled(X)
        blocks = []
        for j in range(Z.shape[1]):
            if self.nominal[j]:
                oh = np.zeros((Z.shape[0], self.n_values[j]))
                oh[np.arange(Z.shape[0]), Z[:, j].astype(np.int64)] = 1.0
                blocks.append(oh)
            else:
                blocks.append(Z[:, j : j + 1])
        if not blocks:
            return np.zeros((Z.shape[0], 0))
        return np.ascontiguousarray(np.hstack(blocks))

    @property
    def encoded_width(self) -> int:
        return int(np.sum(np.where(self.nominal, self.n_values, 1)))

    def state(self) -> dict:
        return {
            "nominal": self.nominal.tolist(),
            "n_values": self.n_values.tolist(),
            "fill": self.fill.tolist(),
            "mins": self.mins.tolist(),
            "ranges": self.ranges.tolist(),
        }

    @classmethod
    def from_state(cls, s):
        return cls(s["nominal"], s["n_values"], s["fill"], s["mins"], s["ranges"])


def _impute(X, fill):
    Z = np.array(X, dtype=np.float64, copy=True)
    mask = np.isnan(Z)
    if mask.any():
        Z[mask] = np.broadcast_to(fill, Z.shape)[mask]
    return Z
