"""Pair-wise EM weighting.

For every pair of classes the instances of those two classes are clustered,
labels hidden, by a mixture of diagonal Gaussians (numeric attributes) and
independent categoricals (nominal attributes). The number of clusters is
chosen by BIC. An instance's weight averages, over the pair models that
contain its label, the probability of that label given the clusters:

    p(y | x) = mean_theta  sum_c p(y | c, theta) p(c | x, theta)
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from ._seeding import derive_seed
from .data import Attribute, Dataset, Schema
from .detrimentality import DetrimentalityEstimate
from .errors import RDILError
from .learners.preprocess import Preprocessor

RESTARTS = 5
MAX_ITER = 200
TOL = 1e-6
VAR_FLOOR = 1e-6
MAX_K = 10


class EMFailure(RDILError):
    """EM broke down (a component lost all responsibility)."""


@dataclass
class Mixture:
    """Fitted mixture parameters.

    ``cats`` holds one ``(k, V)`` probability table per nominal attribute.
    ``history`` records the objective after every iteration; it is the
    log-likelihood plus the log of the add-one smoothing prior when nominal
    attributes are present, which is the quantity EM provably never decreases.
    """

    pi: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    cats: list
    loglik: float
    n_iter: int
    history: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.pi)


class _Data:
    """Numeric block and integer-coded nominal block of a point set."""

    def __init__(self, Z, nominal, n_values, ranges):
        nominal = np.asarray(nominal, dtype=bool)
        self.n = Z.shape[0]
        self.num = np.ascontiguousarray(Z[:, ~nominal], dtype=np.float64)
        self.nom = np.ascontiguousarray(Z[:, nominal], dtype=np.int64)
        self.n_values = [int(v) for v in np.asarray(n_values)[nominal]]
        self.floor = VAR_FLOOR * np.asarray(ranges, dtype=np.float64)[~nominal] ** 2

    def n_params(self, k: int) -> int:
        per = 2 * self.num.shape[1] + sum(v - 1 for v in self.n_values)
        return (k - 1) + k * per


def _component_logpdf(data: _Data, mix: Mixture) -> np.ndarray:
    """``log p(x_i | c)`` for every point and component, shape ``(n, k)``."""
    n, k = data.n, mix.k
    out = np.zeros((n, k))
    if data.num.shape[1]:
        for c in range(k):
            v = mix.variances[c]
            z = data.num - mix.means[c]
            out[:, c] = -0.5 * np.sum(z * z / v + np.log(2 * math.pi * v), axis=1)
    for j, table in enumerate(mix.cats):
        out += np.log(table[:, data.nom[:, j]]).T
    return out


def _e_step(data, mix):
    L = _component_logpdf(data, mix) + np.log(mix.pi)[None, :]
    norm = logsumexp(L, axis=1)
    return np.exp(L - norm[:, None]), float(norm.sum())


def _m_step(data, R):
    Nc = R.sum(axis=0)
    if np.any(Nc <= 1e-10 * data.n):
        raise EMFailure("empty component")
    pi = Nc / Nc.sum()
    k = R.shape[1]
    F = data.num.shape[1]
    means = np.zeros((k, F))
    variances = np.ones((k, F))
    if F:
        means = (R.T @ data.num) / Nc[:, None]
        for c in range(k):
            z = data.num - means[c]
            variances[c] = np.maximum(R[:, c] @ (z * z) / Nc[c], data.floor)
    cats = []
    for j, V in enumerate(data.n_values):
        onehot = np.zeros((data.n, V))
        onehot[np.arange(data.n), data.nom[:, j]] = 1.0
        cats.append((R.T @ onehot + 1.0) / (Nc[:, None] + V))
    return pi, means, variances, cats


def _prior(mix) -> float:
    return float(sum(np.log(t).sum() for t in mix.cats))


def _kmeanspp(data: _Data, k: int, rng) -> np.ndarray:
    """Hard initial assignment from k-means++ seeding (range-scaled HEOM space)."""
    scale = np.sqrt(data.floor / VAR_FLOOR)
    X = data.num / scale if data.num.shape[1] else data.num

    def dist2(i):
        d = np.zeros(data.n)
        if X.shape[1]:
            d += np.sum((X - X[i]) ** 2, axis=1)
        if data.nom.shape[1]:
            d += np.sum(data.nom != data.nom[i], axis=1)
        return d

    centers = [int(rng.integers(data.n))]
    D = dist2(centers[0])
    nearest = np.zeros(data.n, dtype=np.int64)
    for c in range(1, k):
        total = D.sum()
        if total > 0:
            nxt = int(rng.choice(data.n, p=D / total))
        else:
            nxt = int(rng.integers(data.n))
        centers.append(nxt)
        Dn = dist2(nxt)
        closer = Dn < D
        nearest[closer] = c
        D = np.where(closer, Dn, D)
    R = np.zeros((data.n, k))
    R[np.arange(data.n), nearest] = 1.0
    return R


def run_em(data: _Data, k: int, rng, max_iter: int = MAX_ITER, tol: float = TOL) -> Mixture:
    """One EM run from a k-means++ start. Raises :class:`EMFailure` on collapse."""
    R = _kmeanspp(data, k, rng) if k > 1 else np.ones((data.n, 1))
    mix = Mixture(*_m_step(data, R), loglik=-math.inf, n_iter=0)
    prev = -math.inf
    history = []
    for it in range(1, max_iter + 1):
        R, ll = _e_step(data, mix)
        if not math.isfinite(ll):
            raise EMFailure("non-finite log-likelihood")
        obj = ll + _prior(mix)
        history.append(obj)
        mix.loglik, mix.n_iter = ll, it
        if abs(obj - prev) <= tol * abs(obj) or it == max_iter:
            break
        prev = obj
        mix = Mixture(*_m_step(data, R), loglik=ll, n_iter=it)
    mix.history = history
    return mix


def fit_mixture(data: _Data, k: int, seed: int, restarts: int = RESTARTS) -> Optional[Mixture]:
    """Best of ``restarts`` EM runs by log-likelihood, or None if all fail."""
    best = None
    for r in range(restarts if k > 1 else 1):
        try:
            mix = run_em(data, k, np.random.default_rng(derive_seed(seed, k, r)))
        except EMFailure:
            continue
        if best is None or mix.loglik > best.loglik:
            best = mix
    return best


def bic(mix: Mixture, data: _Data) -> float:
    return -2.0 * mix.loglik + data.n_params(mix.k) * math.log(data.n)


def select_k_bic(data: _Data, k_range, seed: int):
    """Return ``(k, mixture, bic_by_k)`` minimizing BIC; ties go to the smaller k."""
    k_range = sorted(k_range)
    if not k_range:
        raise ValueError("empty k range")
    if k_range[-1] > data.n:
        raise ValueError("k exceeds the number of points")
    best = None
    scores = {}
    for k in k_range:
        mix = fit_mixture(data, k, seed)
        if mix is None:
            continue
        scores[k] = bic(mix, data)
        if best is None or scores[k] < scores[best[0]]:
            best = (k, mix)
    if best is None:
        raise EMFailure("EM failed for every candidate k")
    return best[0], best[1], scores


def points(X, nominal=None, n_values=None) -> _Data:
    """Prepare a raw feature matrix (NaN for missing) for mixture fitting.

    Columns flagged in ``nominal`` hold category indices below ``n_values``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    nominal = np.zeros(X.shape[1], dtype=bool) if nominal is None else np.asarray(nominal, dtype=bool)
    n_values = np.zeros(X.shape[1], dtype=np.int64) if n_values is None else n_values
    attrs = tuple(
        Attribute(f"a{j}", tuple(str(v) for v in range(int(n_values[j]))) if nominal[j] else None)
        for j in range(len(nominal))
    )
    schema = Schema(attrs, Attribute("class", ("0",)))
    prep = Preprocessor.fit(schema, np.asarray(X, dtype=np.float64))
    return _Data(prep.impute(X), prep.nominal, prep.n_values, prep.ranges)


@dataclass
class ClusteringModel:
    """EM clustering of the instances of classes ``pair = (a, b)``."""

    pair: tuple
    mixture: Mixture
    label_given_cluster: np.ndarray  # (k, 2): columns are classes a, b
    prep: Preprocessor
    fallback: bool = False
    bic: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.mixture.k

    def _data(self, X) -> _Data:
        p = self.prep
        return _Data(p.impute(X), p.nominal, p.n_values, p.ranges)

    def responsibilities(self, X) -> np.ndarray:
        return _e_step(self._data(X), self.mixture)[0]

    def label_probability(self, X, labels) -> np.ndarray:
        """``sum_c p(label | c) p(c | x)`` for rows whose label is in the pair."""
        col = np.where(np.asarray(labels) == self.pair[0], 0, 1)
        R = self.responsibilities(X)
        return np.sum(R * self.label_given_cluster[:, col].T, axis=1)


def _pair_seed(seed: int, ids: np.ndarray) -> int:
    digest = hashlib.sha256(np.ascontiguousarray(ids, dtype=np.int64).tobytes()).digest()
    return derive_seed(seed, int.from_bytes(digest[:8], "little"))


def k_range_for(n: int) -> range:
    return range(1, max(1, min(MAX_K, n // 5)) + 1)


def fit_pair(d: Dataset, a: int, b: int, seed: int = 0) -> ClusteringModel:
    """Cluster the instances labeled ``a`` or ``b`` and tabulate labels per cluster."""
    a, b = sorted((int(a), int(b)))
    ids = np.flatnonzero((d.y == a) | (d.y == b))
    X = d.X[ids]
    prep = Preprocessor.fit(d.schema, X)
    data = _Data(prep.impute(X), prep.nominal, prep.n_values, prep.ranges)
    pseed = _pair_seed(seed, ids)
    fallback = len(ids) < 4
    if fallback:
        k, mix, scores = 1, fit_mixture(data, 1, pseed), {}
    else:
        k, mix, scores = select_k_bic(data, k_range_for(len(ids)), pseed)
    R = _e_step(data, mix)[0]
    is_a = d.y[ids] == a
    lab = np.stack([R[is_a].sum(axis=0), R[~is_a].sum(axis=0)], axis=1)
    lab = lab / lab.sum(axis=1, keepdims=True)
    return ClusteringModel((a, b), mix, lab, prep, fallback, scores)


def pwem_weights(d: Dataset, seed: int = 0) -> DetrimentalityEstimate:
    """PWEM weights for every instance of ``d``.

    The returned estimate has one vote column per class pair; a column is
    NaN for instances whose label is not in the pair.
    """
    Y = d.n_classes
    if Y < 2:
        raise ValueError("PWEM needs at least two classes")
    present = [c for c in range(Y) if np.any(d.y == c)]
    pairs = list(combinations(range(Y), 2))
    votes = np.full((len(d), len(pairs)), np.nan)
    models = {}
    for j, (a, b) in enumerate(pairs):
        if a not in present or b not in present:
            continue
        model = fit_pair(d, a, b, seed)
        models[(a, b)] = model
        ids = np.flatnonzero((d.y == a) | (d.y == b))
        votes[ids, j] = model.label_probability(d.X[ids], d.y[ids])
    # p(theta) is uniform over the relevant pair models
    relevant = ~np.isnan(votes)
    counts = relevant.sum(axis=1)
    sums = np.where(relevant, votes, 0.0).sum(axis=1)
    weights = np.clip(np.divide(sums, counts, out=np.ones(len(d)), where=counts > 0), 0.0, 1.0)
    names = tuple(f"{d.schema.class_names[a]}_{d.schema.class_names[b]}" for a, b in pairs)
    return DetrimentalityEstimate(weights, votes, names, "pwem", info={"models": models})
