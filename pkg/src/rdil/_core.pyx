# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric kernels. Mirrors ``rdil._pycore`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, exp, log2, sqrt

cnp.import_array()

BACKEND = "cython"

# gains closer than this to the best count as ties
cdef double TIE_TOL = 1e-10


cdef inline double _sig(double z) noexcept nogil:
    return 1.0 / (1.0 + exp(-z))


cdef void _forward(const double[::1] x, const double[:, ::1] W1, const double[::1] b1,
                   const double[:, ::1] W2, const double[::1] b2,
                   double[::1] h, double[::1] o) noexcept nogil:
    cdef Py_ssize_t H = W1.shape[0], F = W1.shape[1], Y = W2.shape[0]
    cdef Py_ssize_t j, k, f
    cdef double net
    for j in range(H):
        net = b1[j]
        for f in range(F):
            net += W1[j, f] * x[f]
        h[j] = _sig(net)
    for k in range(Y):
        net = b2[k]
        for j in range(H):
            net += W2[k, j] * h[j]
        o[k] = _sig(net)


cdef void _deltas(const double[::1] t, double wi, const double[:, ::1] W2,
                  const double[::1] h, const double[::1] o,
                  double[::1] d_out, double[::1] d_hid) noexcept nogil:
    cdef Py_ssize_t H = W2.shape[1], Y = W2.shape[0]
    cdef Py_ssize_t j, k
    cdef double s
    for k in range(Y):
        d_out[k] = wi * ((t[k] - o[k]) * o[k] * (1.0 - o[k]))
    for j in range(H):
        s = 0.0
        for k in range(Y):
            s += d_out[k] * W2[k, j]
        d_hid[j] = s * h[j] * (1.0 - h[j])


def mlp_epoch(const double[:, ::1] X, const double[:, ::1] T, w, bint use_w,
              const cnp.int64_t[::1] order,
              double[:, ::1] W1, double[::1] b1, double[:, ::1] W2, double[::1] b2,
              double[:, ::1] V1, double[::1] vb1, double[:, ::1] V2, double[::1] vb2,
              double lr, double momentum):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t H = W1.shape[0], F = W1.shape[1], Y = W2.shape[0]
    cdef double[::1] wv
    if use_w:
        wv = np.ascontiguousarray(w, dtype=np.float64)
    else:
        wv = np.ones(X.shape[0], dtype=np.float64)
    cdef double[::1] h = np.empty(H)
    cdef double[::1] o = np.empty(Y)
    cdef double[::1] d_out = np.empty(Y)
    cdef double[::1] d_hid = np.empty(H)
    cdef Py_ssize_t r, i, j, k, f
    cdef double wi
    with nogil:
        for r in range(n):
            i = order[r]
            wi = wv[i]
            if use_w and wi == 0.0:
                continue
            _forward(X[i], W1, b1, W2, b2, h, o)
            if use_w:
                _deltas(T[i], wi, W2, h, o, d_out, d_hid)
            else:
                _deltas(T[i], 1.0, W2, h, o, d_out, d_hid)
            for k in range(Y):
                for j in range(H):
                    V2[k, j] = momentum * V2[k, j] + lr * (d_out[k] * h[j])
                vb2[k] = momentum * vb2[k] + lr * d_out[k]
            for j in range(H):
                for f in range(F):
                    V1[j, f] = momentum * V1[j, f] + lr * (d_hid[j] * X[i, f])
                vb1[j] = momentum * vb1[j] + lr * d_hid[j]
            for k in range(Y):
                for j in range(H):
                    W2[k, j] += V2[k, j]
                b2[k] += vb2[k]
            for j in range(H):
                for f in range(F):
                    W1[j, f] += V1[j, f]
                b1[j] += vb1[j]


def mlp_instance_gradient(x, t, double w, W1, b1, W2, b2):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef double[:, ::1] W1v = np.ascontiguousarray(W1, dtype=np.float64)
    cdef double[::1] b1v = np.ascontiguousarray(b1, dtype=np.float64)
    cdef double[:, ::1] W2v = np.ascontiguousarray(W2, dtype=np.float64)
    cdef double[::1] b2v = np.ascontiguousarray(b2, dtype=np.float64)
    cdef Py_ssize_t H = W1v.shape[0], F = W1v.shape[1], Y = W2v.shape[0]
    h = np.empty(H)
    o = np.empty(Y)
    d_out = np.empty(Y)
    d_hid = np.empty(H)
    _forward(xv, W1v, b1v, W2v, b2v, h, o)
    _deltas(tv, w, W2v, h, o, d_out, d_hid)
    return -np.outer(d_hid, x), -d_hid, -np.outer(d_out, h), -d_out


def mlp_forward(X, W1, b1, W2, b2):
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] W1v = np.ascontiguousarray(W1, dtype=np.float64)
    cdef double[::1] b1v = np.ascontiguousarray(b1, dtype=np.float64)
    cdef double[:, ::1] W2v = np.ascontiguousarray(W2, dtype=np.float64)
    cdef double[::1] b2v = np.ascontiguousarray(b2, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], H = W1v.shape[0], Y = W2v.shape[0]
    out = np.empty((n, Y))
    cdef double[:, ::1] ov = out
    cdef double[::1] h = np.empty(H)
    cdef Py_ssize_t i
    for i in range(n):
        _forward(Xv[i], W1v, b1v, W2v, b2v, h, ov[i])
    return out


cdef inline double _xlogx(double v) noexcept nogil:
    return v * log2(v) if v > 0.0 else 0.0


def best_numeric_split(const double[::1] values, const cnp.int64_t[::1] labels,
                       const double[::1] weights, Py_ssize_t n_classes, double min_leaf):
    cdef Py_ssize_t n = values.shape[0]
    if n < 2:
        return 0.0, 0.0, -1
    cdef double[::1] total = np.zeros(n_classes)
    cdef double[::1] left = np.zeros(n_classes)
    cdef double[::1] gains = np.full(n - 1, -INFINITY)
    cdef double[::1] wls = np.zeros(n - 1)
    cdef Py_ssize_t i, c, best_pos = -1
    cdef double W = 0.0, wl = 0.0, wr, base, sl, sr, gain, best_gain = -INFINITY
    cdef double tl, tr, fl, fr, split_info = 0.0
    for i in range(n):
        total[labels[i]] += weights[i]
    for c in range(n_classes):
        W += total[c]
    base = _xlogx(W)
    for c in range(n_classes):
        base -= _xlogx(total[c])
    for i in range(n - 1):
        left[labels[i]] += weights[i]
        if not values[i] < values[i + 1]:
            continue
        wl = 0.0
        for c in range(n_classes):
            wl += left[c]
        wr = W - wl
        if wl < min_leaf or wr < min_leaf:
            continue
        tl = 0.0
        tr = 0.0
        sl = 0.0
        sr = 0.0
        for c in range(n_classes):
            tl += left[c]
            tr += total[c] - left[c]
            sl += _xlogx(left[c])
            sr += _xlogx(total[c] - left[c])
        gain = (base - ((_xlogx(tl) - sl) + (_xlogx(tr) - sr))) / W
        gains[i] = gain
        wls[i] = wl
        if gain > best_gain:
            best_gain = gain
    if best_gain == -INFINITY:
        return 0.0, 0.0, -1
    # near-ties go to the lowest position
    for i in range(n - 1):
        if gains[i] >= best_gain - TIE_TOL:
            best_pos = i
            break
    fl = wls[best_pos] / W
    fr = (W - wls[best_pos]) / W
    split_info = 0.0
    if fl > 0:
        split_info -= fl * log2(fl)
    if fr > 0:
        split_info -= fr * log2(fr)
    return gains[best_pos], split_info, best_pos


def heom_distances(Q, R, nominal, ranges):
    cdef double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.uint8_t[::1] nom = np.ascontiguousarray(nominal, dtype=np.uint8)
    cdef double[::1] rng = np.ascontiguousarray(ranges, dtype=np.float64)
    cdef Py_ssize_t nq = Qv.shape[0], nr = Rv.shape[0], F = Qv.shape[1]
    out = np.empty((nq, nr))
    cdef double[:, ::1] D = out
    cdef Py_ssize_t a, b, j
    cdef double s, diff
    with nogil:
        for a in range(nq):
            for b in range(nr):
                s = 0.0
                for j in range(F):
                    if nom[j]:
                        if Qv[a, j] != Rv[b, j]:
                            s += 1.0
                    else:
                        diff = (Qv[a, j] - Rv[b, j]) / rng[j]
                        s += diff * diff
                D[a, b] = sqrt(s)
    return out
