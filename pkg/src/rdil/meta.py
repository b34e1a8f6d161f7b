"""Unsupervised meta-learning over learners.

Learners are compared by classifier output difference (COD), the fraction of
test instances on which two learners predict different labels, and grouped
by agglomerative clustering of the COD matrix. Cutting the dendrogram at a
height yields groups of learners that behave alike; picking one learner per
group gives a diverse ensemble.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._seeding import derive_seed
from .data import Dataset, stratified_split
from .errors import RDILError
from .learners import LearnerSpec, train
from .detrimentality import member_names

logger = logging.getLogger(__name__)

LINKAGES = ("average", "single", "complete")


def cod_distance(a, b) -> float:
    """Fraction of positions where two prediction sequences differ."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("prediction sequences must have equal length")
    if a.size == 0:
        raise ValueError("prediction sequences must be non-empty")
    return float(np.count_nonzero(a != b)) / a.size


@dataclass
class CodMatrix:
    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.values = np.asarray(self.values, dtype=np.float64)
        n = len(self.labels)
        if self.values.shape != (n, n):
            raise ValueError("matrix shape does not match the labels")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be unique")
        if not np.allclose(self.values, self.values.T, atol=0, rtol=0) or np.any(np.diag(self.values) != 0):
            raise ValueError("matrix must be symmetric with a zero diagonal")
        if np.any(self.values < 0) or np.any(self.values > 1):
            raise ValueError("entries must lie in [0, 1]")

    @classmethod
    def from_pairs(cls, labels, pairs: dict) -> "CodMatrix":
        """Build from ``{(a, b): distance}`` over label names."""
        idx = {l: i for i, l in enumerate(labels)}
        V = np.zeros((len(labels), len(labels)))
        for (a, b), v in pairs.items():
            V[idx[a], idx[b]] = V[idx[b], idx[a]] = v
        return cls(tuple(labels), V)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(self.labels))
        for name, row in zip(self.labels, self.values):
            w.writerow([name] + [repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CodMatrix":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        labels = tuple(rows[0][1:])
        return cls(labels, np.array([[float(v) for v in r[1:]] for r in rows[1:]]))


def cod_matrix(datasets: Sequence[Dataset], learners: Sequence[LearnerSpec], seed: int = 0,
               train_fraction=Fraction(2, 3)) -> CodMatrix:
    """Mean COD between learners over one stratified split per dataset.

    A learner that fails on a dataset is left out of that dataset's pairs;
    each entry averages over the datasets where both learners succeeded.
    """
    learners = [LearnerSpec(l) if isinstance(l, str) else l for l in learners]
    if len(learners) < 2:
        raise ValueError("need at least two learners")
    if not datasets:
        raise ValueError("need at least one dataset")
    names = member_names(learners)
    L = len(learners)
    sums = np.zeros((L, L))
    counts = np.zeros((L, L), dtype=np.int64)
    for di, d in enumerate(datasets):
        tr, te = stratified_split(d, train_fraction, derive_seed(seed, di))
        preds = []
        for spec in learners:
            try:
                preds.append(train(spec, tr).predict(te.X))
            except RDILError as exc:
                logger.warning("%s failed on dataset %d: %s", spec.kind, di, exc)
                preds.append(None)
        for i in range(L):
            for j in range(i + 1, L):
                if preds[i] is None or preds[j] is None:
                    continue
                v = cod_distance(preds[i], preds[j])
                sums[i, j] += v
                sums[j, i] += v
                counts[i, j] += 1
                counts[j, i] += 1
    off = ~np.eye(L, dtype=bool)
    if np.any(counts[off] == 0):
        raise RDILError("some learner pair has no dataset on which both succeeded")
    values = np.zeros((L, L))
    values[off] = sums[off] / counts[off]
    return CodMatrix(names, values)


@dataclass(frozen=True)
class Merge:
    left: frozenset
    right: frozenset
    height: float


@dataclass
class Dendrogram:
    """Merge sequence of an agglomerative clustering.

    Each merge joins two clusters (sets of leaf names) at a height.
    """

    leaves: tuple
    merges: list
    linkage: str = "average"

    def heights(self) -> list:
        return [m.height for m in self.merges]

    def newick(self) -> str:
        """Newick tree with branch lengths so each merge sits at its height."""
        node = {frozenset([l]): (l, 0.0) for l in self.leaves}
        for m in self.merges:
            (ls, lh), (rs, rh) = node.pop(m.left), node.pop(m.right)
            s = f"({ls}:{_fmt(m.height - lh)},{rs}:{_fmt(m.height - rh)})"
            node[m.left | m.right] = (s, m.height)
        (s, _), = node.values()
        return s + ";"

    def to_text(self) -> str:
        lines = []
        for i, m in enumerate(self.merges, 1):
            lines.append(f"{i}. {_names(m.left)} + {_names(m.right)} at {m.height:.6g}")
        return "\n".join(lines)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _names(cluster) -> str:
    return "{" + ",".join(sorted(cluster)) + "}"


def _link(D, a, b, linkage):
    block = D[np.ix_(a, b)]
    if linkage == "average":
        return float(block.mean())
    if linkage == "single":
        return float(block.min())
    return float(block.max())


def agglomerative_cluster(m: CodMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering of the learners in ``m``.

    Ties between candidate merges go to the pair whose sorted member names
    come first lexicographically.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}")
    n = len(m.labels)
    if n < 2:
        raise ValueError("need at least two learners")
    clusters = [[i] for i in range(n)]
    merges = []
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                h = _link(m.values, clusters[i], clusters[j], linkage)
                key_a = sorted(m.labels[x] for x in clusters[i])
                key_b = sorted(m.labels[x] for x in clusters[j])
                tie_key = tuple(sorted((key_a, key_b)))
                cand = (h, tie_key, i, j)
                if best is None or cand[:2] < best[:2]:
                    best = cand
        h, (first, second), i, j = best
        a = frozenset(m.labels[x] for x in clusters[i])
        b = frozenset(m.labels[x] for x in clusters[j])
        left, right = (a, b) if sorted(a) == first else (b, a)
        merges.append(Merge(left, right, h))
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    return Dendrogram(tuple(m.labels), merges, linkage)


def cut_dendrogram(dd: Dendrogram, height: float) -> list:
    """Clusters left after undoing every merge above ``height``.

    Returned as sorted lists of names, ordered by their first name.
    """
    if height < 0:
        raise ValueError("height must be non-negative")
    groups = {l: frozenset([l]) for l in dd.leaves}
    for mg in dd.merges:
        if mg.height <= height:
            joined = mg.left | mg.right
            for l in joined:
                groups[l] = joined
    uniq = {g for g in groups.values()}
    return sorted((sorted(g) for g in uniq), key=lambda g: g[0])
