"""Pure-Python implementations of the numeric kernels.

Same signatures and semantics as the compiled ``_core`` module; used when the
extension is unavailable or ``RDIL_PURE_PYTHON`` is set.
"""

import math

import numpy as np

BACKEND = "python"

# gains closer than this to the best count as ties
TIE_TOL = 1e-10


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def mlp_epoch(X, T, w, use_w, order, W1, b1, W2, b2, V1, vb1, V2, vb2, lr, momentum):
    """One pass of per-instance backprop with momentum, updating arrays in place.

    Instances with zero weight are skipped entirely (no step, no momentum decay).
    """
    for i in order:
        wi = w[i] if use_w else 1.0
        if use_w and wi == 0.0:
            continue
        x = X[i]
        h = _sigmoid(W1 @ x + b1)
        o = _sigmoid(W2 @ h + b2)
        d_out = (T[i] - o) * o * (1.0 - o)
        if use_w:
            d_out = d_out * wi
        d_hid = (d_out @ W2) * h * (1.0 - h)
        V2 *= momentum
        V2 += lr * np.outer(d_out, h)
        vb2 *= momentum
        vb2 += lr * d_out
        V1 *= momentum
        V1 += lr * np.outer(d_hid, x)
        vb1 *= momentum
        vb1 += lr * d_hid
        W2 += V2
        b2 += vb2
        W1 += V1
        b1 += vb1


def mlp_instance_gradient(x, t, w, W1, b1, W2, b2):
    """Gradient of ``w * 0.5 * ||t - o||^2`` for one instance."""
    h = _sigmoid(W1 @ x + b1)
    o = _sigmoid(W2 @ h + b2)
    d_out = w * (t - o) * o * (1.0 - o)
    d_hid = (d_out @ W2) * h * (1.0 - h)
    return -np.outer(d_hid, x), -d_hid, -np.outer(d_out, h), -d_out


def mlp_forward(X, W1, b1, W2, b2):
    H = _sigmoid(X @ W1.T + b1)
    return _sigmoid(H @ W2.T + b2)


def _info_sum(counts):
    """``W*log2(W) - sum(c*log2(c))`` over the last axis (entropy times weight)."""
    total = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        clog = np.where(counts > 0, counts * np.log2(np.where(counts > 0, counts, 1.0)), 0.0)
        tlog = np.where(total > 0, total * np.log2(np.where(total > 0, total, 1.0)), 0.0)
    return tlog - clog.sum(axis=-1)


def best_numeric_split(values, labels, weights, n_classes, min_leaf):
    """Best binary threshold on a sorted numeric column by information gain.

    Parameters
    ----------
    values, labels, weights : arrays sorted by ``values`` ascending
    n_classes : int
    min_leaf : float
        Minimum total weight on each side.

    Returns
    -------
    (gain, split_info, position)
        ``position`` is the last index of the left part, or -1 when no
        admissible threshold exists. Gains within ``TIE_TOL`` of the best
        count as ties, which go to the lowest position.
    """
    n = len(values)
    if n < 2:
        return 0.0, 0.0, -1
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), labels] = weights
    left = np.cumsum(onehot, axis=0)[:-1]
    total_counts = left[-1] + onehot[-1]
    right = total_counts - left
    wl = left.sum(axis=1)
    W = float(total_counts.sum())
    wr = W - wl
    ok = (values[:-1] < values[1:]) & (wl >= min_leaf) & (wr >= min_leaf)
    if not ok.any():
        return 0.0, 0.0, -1
    base = float(_info_sum(total_counts))
    split_sum = _info_sum(left) + _info_sum(right)
    gains = (base - split_sum) / W
    gains = np.where(ok, gains, -np.inf)
    # near-ties go to the lowest position
    pos = int(np.flatnonzero(gains >= gains.max() - TIE_TOL)[0])
    fl = wl[pos] / W
    fr = wr[pos] / W
    split_info = 0.0
    if fl > 0:
        split_info -= fl * math.log2(fl)
    if fr > 0:
        split_info -= fr * math.log2(fr)
    return float(gains[pos]), split_info, pos


def heom_distances(Q, R, nominal, ranges):
    """Heterogeneous Euclidean-overlap distances between rows of Q and R.

    Numeric differences are divided by ``ranges``; nominal columns add 0 or 1.
    """
    D = np.zeros((Q.shape[0], R.shape[0]))
    for j in range(Q.shape[1]):
        if nominal[j]:
            D += (Q[:, j][:, None] != R[:, j][None, :]).astype(np.float64)
        else:
            diff = (Q[:, j][:, None] - R[:, j][None, :]) / ranges[j]
            D += diff * diff
    return np.sqrt(D)
