"""Weighted decision trees: C4.5-style gain-ratio trees and random trees.

Every count the induction uses (split gains, leaf class distributions and the
pessimistic pruning estimates) is a sum of instance weights.
"""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np

from .. import kernels
from .base import Model, normalize_rows, positive_part
from .preprocess import Preprocessor

_GAIN_EPS = 1e-10
# slack on the minimum-leaf-weight test so rescaled weights summing to the
# bound are not rejected by rounding
_LEAF_SLACK = 1e-9


class Node:
    __slots__ = ("counts", "dist", "attr", "nominal", "threshold", "children")

    def __init__(self, counts, dist=None):
        self.counts = counts
        self.dist = counts if dist is None else dist
        self.attr = -1
        self.nominal = False
        self.threshold = 0.0
        self.children = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def weight(self) -> float:
        return float(self.counts.sum())

    def make_leaf(self):
        self.attr = -1
        self.children = None

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return sum(c.n_leaves() for c in self.children)

    def to_dict(self) -> dict:
        out = {"counts": self.counts.tolist()}
        if self.dist is not self.counts:
            out["dist"] = self.dist.tolist()
        if not self.is_leaf:
            out["attr"] = self.attr
            out["nominal"] = self.nominal
            out["threshold"] = self.threshold
            out["children"] = [c.to_dict() for c in self.children]
        return out

    @classmethod
    def from_dict(cls, d) -> "Node":
        counts = np.asarray(d["counts"], dtype=np.float64)
        node = cls(counts, np.asarray(d["dist"], dtype=np.float64) if "dist" in d else None)
        if "children" in d:
            node.attr = int(d["attr"])
            node.nominal = bool(d["nominal"])
            node.threshold = float(d["threshold"])
            node.children = [cls.from_dict(c) for c in d["children"]]
        return node


def _info(counts) -> float:
    """Entropy of ``counts`` multiplied by their total."""
    W = counts.sum()
    if W <= 0:
        return 0.0
    nz = counts[counts > 0]
    return float(W * math.log2(W) - np.sum(nz * np.log2(nz)))


def _split_info(weights, W) -> float:
    f = weights[weights > 0] / W
    return float(-np.sum(f * np.log2(f)))


class TreeBuilder:
    """Grows one tree over imputed raw features.

    Parameters
    ----------
    nominal : bool array, which columns are nominal
    n_values : per-column nominal cardinality
    n_classes : int
    min_leaf : float, minimum weight on at least two branches of a split
    criterion : ``"gain_ratio"`` (C4.5) or ``"gain"`` (random trees)
    max_features : attributes sampled per node, or None for all
    rng : generator used for attribute sampling
    """

    def __init__(self, nominal, n_values, n_classes, min_leaf, criterion="gain_ratio",
                 max_features=None, rng=None):
        self.nominal = np.asarray(nominal, dtype=bool)
        self.n_values = np.asarray(n_values, dtype=np.int64)
        self.Y = n_classes
        self.min_leaf = min_leaf
        self.min_leaf_test = min_leaf * (1.0 - _LEAF_SLACK)
        self.criterion = criterion
        self.max_features = max_features
        self.rng = rng

    def build(self, X, y, w) -> Node:
        self.X, self.y, self.w = X, y, w
        root = self._grow(np.arange(len(y)))
        del self.X, self.y, self.w
        return root

    def _grow(self, idx) -> Node:
        y, w = self.y[idx], self.w[idx]
        counts = np.bincount(y, weights=w, minlength=self.Y)
        node = Node(counts)
        W = counts.sum()
        if W < 2 * self.min_leaf_test or np.count_nonzero(counts) <= 1:
            return node
        split = self._choose_split(idx, counts, W)
        if split is None:
            return node
        attr, threshold = split
        col = self.X[idx, attr]
        if self.nominal[attr]:
            vals = col.astype(np.int64)
            children = []
            for v in range(self.n_values[attr]):
                sub = idx[vals == v]
                if sub.size == 0:
                    children.append(Node(np.zeros(self.Y), counts.copy()))
                else:
                    children.append(self._grow(sub))
        else:
            left = col <= threshold
            children = [self._grow(idx[left]), self._grow(idx[~left])]
        node.attr = int(attr)
        node.nominal = bool(self.nominal[attr])
        node.threshold = float(threshold)
        node.children = children
        return node

    def _evaluate(self, attr, idx, counts, W):
        """Return (gain, split_info, threshold) or None when no admissible split."""
        col = self.X[idx, attr]
        y, w = self.y[idx], self.w[idx]
        if self.nominal[attr]:
            V = self.n_values[attr]
            table = np.bincount(col.astype(np.int64) * self.Y + y, weights=w, minlength=V * self.Y)
            table = table.reshape(V, self.Y)
            branch_w = table.sum(axis=1)
            if np.count_nonzero(branch_w >= self.min_leaf_test) < 2:
                return None
            gain = (_info(counts) - sum(_info(row) for row in table)) / W
            return gain, _split_info(branch_w, W), 0.0
        order = np.argsort(col, kind="stable")
        v = np.ascontiguousarray(col[order])
        gain, split_info, pos = kernels.best_numeric_split(
            v, np.ascontiguousarray(y[order]), np.ascontiguousarray(w[order]), self.Y, self.min_leaf_test
        )
        if pos < 0:
            return None
        threshold = (v[pos] + v[pos + 1]) / 2.0
        if not threshold < v[pos + 1]:
            threshold = v[pos]
        return gain, split_info, threshold

    def _choose_split(self, idx, counts, W):
        F = len(self.nominal)
        if self.criterion == "gain_ratio":
            results = []
            for attr in range(F):
                r = self._evaluate(attr, idx, counts, W)
                if r is not None and r[0] > _GAIN_EPS and r[1] > 0:
                    results.append((attr, r))
            if not results:
                return None
            avg_gain = sum(r[0] for _, r in results) / len(results)
            best = None
            best_ratio = -math.inf
            for attr, (gain, si, thr) in results:
                if gain >= avg_gain - _GAIN_EPS:
                    ratio = gain / si
                    if ratio > best_ratio + _GAIN_EPS:
                        best_ratio = ratio
                        best = (attr, thr)
            return best
        # random tree: best gain among a random attribute subset, drawing
        # further attributes only while nothing useful has been found
        k = self.max_features or F
        order = self.rng.permutation(F)
        best = None
        best_gain = _GAIN_EPS
        for pos, attr in enumerate(order):
            if pos >= k and best is not None:
                break
            r = self._evaluate(attr, idx, counts, W)
            if r is not None and r[0] > best_gain + (_GAIN_EPS if best is not None else 0.0):
                best_gain = r[0]
                best = (int(attr), r[2])
        return best


def add_errors(N: float, e: float, cf: float) -> float:
    """Extra errors predicted at confidence ``cf`` for ``e`` errors out of ``N``.

    Upper confidence limit of the binomial error rate, as used by C4.5's
    pessimistic pruning.
    """
    if N <= 0:
        return 0.0
    if e < 1:
        base = N * (1.0 - cf ** (1.0 / N))
        if e == 0:
            return base
        return base + e * (add_errors(N, 1.0, cf) - base)
    if e + 0.5 >= N:
        return max(N - e, 0.0)
    z = NormalDist().inv_cdf(1.0 - cf)
    f = (e + 0.5) / N
    r = (f + z * z / (2 * N) + z * math.sqrt(f / N - f * f / N + z * z / (4 * N * N))) / (1 + z * z / N)
    return r * N - e


def _leaf_estimate(node: Node, cf: float) -> float:
    N = node.weight
    e = N - float(node.counts.max()) if N > 0 else 0.0
    return e + add_errors(N, e, cf)


def prune(node: Node, cf: float) -> float:
    """Collapse subtrees whose estimated errors do not beat a leaf's. Returns the estimate."""
    if node.is_leaf:
        return _leaf_estimate(node, cf)
    subtree = sum(prune(c, cf) for c in node.children)
    as_leaf = _leaf_estimate(node, cf)
    if as_leaf <= subtree + 0.1 + 1e-9 * subtree:
        node.make_leaf()
        return as_leaf
    return subtree


def leaf_distributions(root: Node, X: np.ndarray) -> np.ndarray:
    """Class-weight vector of the leaf each row of ``X`` reaches."""
    out = np.empty((X.shape[0], len(root.counts)))
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.dist
            continue
        col = X[idx, node.attr]
        if node.nominal:
            vals = col.astype(np.int64)
            for v, child in enumerate(node.children):
                stack.append((child, idx[vals == v]))
        else:
            left = col <= node.threshold
            stack.append((node.children[0], idx[left]))
            stack.append((node.children[1], idx[~left]))
    return out


class C45Model(Model):
    kind = "tree_c45"

    def __init__(self, spec, schema, fingerprint, prep, root):
        super().__init__(spec, schema, fingerprint)
        self.prep = prep
        self.root = root

    @classmethod
    def fit(cls, spec, d, w):
        hp = spec.hyper
        X, y, wk = positive_part(d, w)
        prep = Preprocessor.fit(d.schema, X)
        Z = prep.impute(X)
        builder = TreeBuilder(prep.nominal, prep.n_values, d.n_classes, float(hp["min_leaf"]))
        root = builder.build(Z, y, wk)
        if hp["prune"]:
            prune(root, float(hp["confidence"]))
        return cls(spec, d.schema, d.fingerprint(), prep, root)

    def leaf_counts(self, X) -> np.ndarray:
        return leaf_distributions(self.root, self.prep.impute(self._check_X(X)))

    def _scores(self, X):
        return normalize_rows(leaf_distributions(self.root, self.prep.impute(X)))

    def state_dict(self):
        return {"prep": self.prep.state(), "root": self.root.to_dict()}

    @classmethod
    def from_state(cls, spec, schema, fingerprint, s):
        return cls(spec, schema, fingerprint, Preprocessor.from_state(s["prep"]), Node.from_dict(s["root"]))
