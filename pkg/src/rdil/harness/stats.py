"""Paired comparison statistics: Wilcoxon signed-ranks, g/e/l counts and
noise-identification precision/recall."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 25
ZERO_MODES = ("drop", "split")


@dataclass(frozen=True)
class WilcoxonResult:
    """``statistic`` is min(W+, W-); iterating yields ``(statistic, pvalue)``."""

    statistic: float
    pvalue: float
    n: int
    method: str
    w_plus: float = 0.0
    w_minus: float = 0.0
    no_information: bool = False

    def __iter__(self):
        return iter((self.statistic, self.pvalue))


def signed_rank_null(ranks) -> tuple[np.ndarray, np.ndarray]:
    """Exact null distribution of W+ for the given (possibly mid-) ranks.

    Each rank enters W+ with probability 1/2. Returns ``(support, probs)``;
    ranks are doubled internally so mid-ranks stay integral.
    """
    r2 = np.rint(2 * np.asarray(ranks, dtype=np.float64)).astype(np.int64)
    total = int(r2.sum())
    dist = np.zeros(total + 1)
    dist[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: total + 1 - r]
        dist = 0.5 * (dist + shifted)
    return np.arange(total + 1) / 2.0, dist


def _exact_p(ranks, W) -> float:
    support, probs = signed_rank_null(ranks)
    S = float(np.sum(ranks))
    lo = np.minimum(support, S - support)
    return float(min(1.0, probs[lo <= W + 1e-9].sum()))


def _normal_p(ranks, W, offset=0.0) -> float:
    ranks = np.asarray(ranks, dtype=np.float64)
    mean = (ranks.sum() + 2 * offset) / 2.0
    var = np.sum(ranks ** 2) / 4.0
    if var <= 0:
        return 1.0
    z = (W - mean + 0.5) / math.sqrt(var)
    return float(min(1.0, 2.0 * norm.cdf(z)))


def wilcoxon_signed_ranks(a, b, method: str = "auto", zero_mode: str = "drop") -> WilcoxonResult:
    """Two-sided Wilcoxon signed-ranks test of paired samples ``a`` and ``b``.

    Parameters
    ----------
    method : ``"auto"``, ``"exact"`` or ``"normal"``
        ``auto`` enumerates the null distribution when at most 25 non-zero
        differences remain, otherwise uses the normal approximation with
        tie-corrected variance and continuity correction.
    zero_mode : ``"drop"`` or ``"split"``
        Drop zero differences before ranking, or rank them and split their
        ranks evenly between W+ and W- (always normal approximation).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise ValueError("samples must be paired 1-D sequences of equal nonzero length")
    if method not in ("auto", "exact", "normal"):
        raise ValueError("method must be auto, exact or normal")
    if zero_mode not in ZERO_MODES:
        raise ValueError(f"zero_mode must be one of {ZERO_MODES}")
    d = a - b
    nonzero = d != 0
    if not nonzero.any():
        return WilcoxonResult(0.0, 1.0, 0, "none", no_information=True)
    if zero_mode == "drop":
        d = d[nonzero]
        ranks = rankdata(np.abs(d))
        w_plus = float(ranks[d > 0].sum())
        w_minus = float(ranks[d < 0].sum())
        W = min(w_plus, w_minus)
        n = d.size
        use_exact = method == "exact" or (method == "auto" and n <= EXACT_MAX_N)
        if use_exact:
            return WilcoxonResult(W, _exact_p(ranks, W), n, "exact", w_plus, w_minus)
        return WilcoxonResult(W, _normal_p(ranks, W), n, "normal", w_plus, w_minus)
    ranks = rankdata(np.abs(d))
    zero_half = float(ranks[~nonzero].sum()) / 2.0
    w_plus = float(ranks[d > 0].sum()) + zero_half
    w_minus = float(ranks[d < 0].sum()) + zero_half
    W = min(w_plus, w_minus)
    return WilcoxonResult(W, _normal_p(ranks[nonzero], W, zero_half), d.size, "normal",
                          w_plus, w_minus)


def gel_counts(a, b, tol: float = 1e-9) -> tuple[int, int, int]:
    """Counts of ``a`` greater than, equal to (within ``tol``) and less than ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("sequences must have equal length")
    diff = a - b
    eq = np.abs(diff) <= tol
    return int(np.count_nonzero(~eq & (diff > 0))), int(np.count_nonzero(eq)), int(np.count_nonzero(~eq & (diff < 0)))


def noise_identification_metrics(flagged, flipped) -> tuple[float, float]:
    """Precision and recall of ``flagged`` ids against the ``flipped`` ids.

    ``flipped`` may be a CorruptionRecord. Empty flagged sets have precision
    1.0; recall is 1.0 when nothing was flipped.
    """
    if hasattr(flipped, "flipped"):
        flipped = flipped.flipped.keys()
    flagged = {int(i) for i in flagged}
    flipped = {int(i) for i in flipped}
    hit = len(flagged & flipped)
    precision = hit / len(flagged) if flagged else 1.0
    recall = hit / len(flipped) if flipped else 1.0
    return precision, recall
