"""Noise filters: ensemble-vote filtering, biased filtering and RENN.

A filter is weighting restricted to 0/1 weights: removed instances get 0.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .data import Dataset
from .detrimentality import DetrimentalityEstimate, estimate_biased
from .learners import LearnerSpec
from .learners.preprocess import Preprocessor

# slack for the vote-fraction comparison so 5/10 >= 0.5 despite rounding
_EPS = 1e-12


@dataclass
class FilterResult:
    """Outcome of a filter.

    ``evidence`` maps each removed id to the misclassified vote fraction
    (vote filters) or the round that removed it (RENN). ``flagged`` is set
    when a guard overrode the plain rule, with the reason in ``note``.
    """

    retained_ids: np.ndarray
    removed_ids: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    rounds: int = 0
    evidence: dict = field(default_factory=dict)
    flagged: bool = False
    note: str = ""

    @property
    def n(self) -> int:
        return len(self.retained_ids) + len(self.removed_ids)

    def keep_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.retained_ids] = True
        return mask

    def as_weights(self) -> np.ndarray:
        return self.keep_mask().astype(np.float64)

    def apply(self, d: Dataset) -> Dataset:
        return d.subset(self.retained_ids)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["instance_id", "kept", "evidence"])
        keep = self.keep_mask()
        for i in range(self.n):
            ev = self.evidence.get(i)
            w.writerow([i, int(keep[i]), "" if ev is None else repr(ev)])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def _vote_filter(weights, labels, threshold, method, params) -> FilterResult:
    weights = np.asarray(weights, dtype=np.float64)
    wrong = 1.0 - weights
    remove = wrong >= threshold - _EPS
    flagged, notes = False, []
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if members.size and remove[members].all():
            # keep the class's most trusted instance (lowest id on ties)
            keep = members[np.argmax(weights[members])]
            remove[keep] = False
            flagged = True
            notes.append(f"class {int(c)} would be emptied; kept instance {int(keep)}")
    removed = np.flatnonzero(remove)
    return FilterResult(
        np.flatnonzero(~remove), removed, method, params,
        evidence={int(i): float(wrong[i]) for i in removed},
        flagged=flagged, note="; ".join(notes),
    )


def ensemble_filter(est: DetrimentalityEstimate, threshold: float = 0.5, labels=None) -> FilterResult:
    """Remove instances misclassified by at least ``threshold`` of the members.

    ``labels`` (the dataset's labels) enables the guard that keeps each
    class's highest-weight instance when a class would otherwise be emptied.
    """
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    if labels is None:
        labels = np.zeros(len(est.weights), dtype=np.int64)
    return _vote_filter(est.weights, np.asarray(labels), threshold, "ensemble",
                        {"threshold": threshold, "members": list(est.members)})


def biased_filter(d: Dataset, learner, folds: int = 10, seed: int = 0, n_jobs: int = 1) -> FilterResult:
    """Remove instances the learner itself misclassifies under cross-validation."""
    if isinstance(learner, str):
        learner = LearnerSpec(learner)
    est = estimate_biased(d, learner, folds, "delta", seed, n_jobs)
    res = ensemble_filter(est, 1.0, d.y)
    res.method = "biased"
    res.params = {"learner": learner.kind, "folds": folds}
    return res


def _majority(labels, n_classes):
    counts = np.zeros((labels.shape[0], n_classes))
    np.add.at(counts, (np.repeat(np.arange(labels.shape[0]), labels.shape[1]), labels.ravel()), 1.0)
    return np.argmax(counts, axis=1)


def renn(d: Dataset, k: int = 3) -> FilterResult:
    """Repeated edited nearest neighbour.

    Each pass classifies every surviving instance by its ``k`` nearest other
    survivors (HEOM distance, ties by id) and removes the misclassified ones,
    until a pass removes nothing. A pass that would empty a class is not
    applied and ends the procedure (the result is flagged).
    """
    n = len(d)
    if n < k + 1:
        raise ValueError(f"RENN needs at least {k + 1} instances")
    prep = Preprocessor.fit(d.schema, d.X)
    Z = prep.impute(d.X)
    D = kernels.heom_distances(Z, Z, prep.nominal, prep.ranges)
    np.fill_diagonal(D, np.inf)
    alive = np.arange(n)
    evidence = {}
    rounds = 0
    flagged, note = False, ""
    while True:
        rounds += 1
        if alive.size <= k:
            break
        sub = D[np.ix_(alive, alive)]
        nn = np.argsort(sub, axis=1, kind="stable")[:, :k]
        pred = _majority(d.y[alive][nn], d.n_classes)
        wrong = pred != d.y[alive]
        if not wrong.any():
            break
        survivors = alive[~wrong]
        emptied = [c for c in np.unique(d.y[alive]) if not np.any(d.y[survivors] == c)]
        if emptied:
            flagged = True
            note = f"pass {rounds} would empty class(es) {[int(c) for c in emptied]}; stopped"
            break
        for i in alive[wrong]:
            evidence[int(i)] = rounds
        alive = survivors
    keep = np.zeros(n, dtype=bool)
    keep[alive] = True
    return FilterResult(np.flatnonzero(keep), np.flatnonzero(~keep), "renn", {"k": k},
                        rounds, evidence, flagged, note)
