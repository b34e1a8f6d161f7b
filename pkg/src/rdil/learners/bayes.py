"""Naive Bayes with weighted frequency tables and weighted Gaussian numerics."""

import math

import numpy as np

from .base import Model, positive_part
from .preprocess import Preprocessor

_LOG_2PI = math.log(2.0 * math.pi)


class NaiveBayesModel(Model):
    kind = "naive_bayes"

    def __init__(self, spec, schema, fingerprint, prep, log_prior, tables, means, stds):
        super().__init__(spec, schema, fingerprint)
        self.prep = prep
        self.log_prior = log_prior
        self.tables = tables  # attr index -> (Y, V) log-probabilities, nominal only
        self.means = means  # (Y, F), numeric columns meaningful
        self.stds = stds

    @classmethod
    def fit(cls, spec, d, w):
        X, y, wk = positive_part(d, w)
        prep = Preprocessor.fit(d.schema, X)
        Z = prep.impute(X)
        Y = d.n_classes
        class_w = np.bincount(y, weights=wk, minlength=Y)
        # Laplace-smoothed priors and frequency tables
        log_prior = np.log((class_w + 1.0) / (class_w.sum() + Y))
        F = Z.shape[1]
        tables = {}
        means = np.zeros((Y, F))
        stds = np.ones((Y, F))
        for j in range(F):
            col = Z[:, j]
            if prep.nominal[j]:
                V = int(prep.n_values[j])
                t = np.bincount(y * V + col.astype(np.int64), weights=wk, minlength=Y * V).reshape(Y, V)
                tables[j] = np.log((t + 1.0) / (class_w[:, None] + V))
                continue
            floor = 1e-3 * prep.ranges[j] + 1e-9
            total_mean = float(np.sum(wk * col) / wk.sum())
            total_std = math.sqrt(float(np.sum(wk * (col - total_mean) ** 2) / wk.sum()))
            for c in range(Y):
                m = y == c
                wc = class_w[c]
                if wc <= 0:
                    means[c, j] = total_mean
                    stds[c, j] = max(total_std, floor)
                    continue
                mu = float(np.sum(wk[m] * col[m]) / wc)
                var = float(np.sum(wk[m] * (col[m] - mu) ** 2) / wc)
                means[c, j] = mu
                stds[c, j] = max(math.sqrt(var), floor)
        return cls(spec, d.schema, d.fingerprint(), prep, log_prior, tables, means, stds)

    def log_joint(self, X) -> np.ndarray:
        Z = self.prep.impute(self._check_X(X))
        return self._log_joint(Z)

    def _log_joint(self, Z):
        L = np.tile(self.log_prior, (Z.shape[0], 1))
        for j in range(Z.shape[1]):
            if j in self.tables:
                L += self.tables[j][:, Z[:, j].astype(np.int64)].T
            else:
                mu = self.means[:, j]
                sd = self.stds[:, j]
                z = (Z[:, j][:, None] - mu[None, :]) / sd[None, :]
                L += -0.5 * z * z - np.log(sd)[None, :] - 0.5 * _LOG_2PI
        return L

    def _scores(self, X):
        L = self._log_joint(self.prep.impute(X))
        L -= L.max(axis=1, keepdims=True)
        P = np.exp(L)
        return P / P.sum(axis=1, keepdims=True)

    def state_dict(self):
        return {
            "prep": self.prep.state(),
            "log_prior": self.log_prior.tolist(),
            "tables": {str(j): t.tolist() for j, t in self.tables.items()},
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
        }

    @classmethod
    def from_state(cls, spec, schema, fingerprint, s):
        Y = len(s["log_prior"])
        F = schema.n_features
        return cls(
            spec, schema, fingerprint, Preprocessor.from_state(s["prep"]),
            np.asarray(s["log_prior"], dtype=np.float64),
            {int(j): np.asarray(t, dtype=np.float64) for j, t in s["tables"].items()},
            np.asarray(s["means"], dtype=np.float64).reshape(Y, F),
            np.asarray(s["stds"], dtype=np.float64).reshape(Y, F),
        )
