# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: pairwise distances, kNN selection, signed graph loss, Pegasos."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()

cdef double ZERO_NORM = 1e-12


cdef inline double _clamp(double v) noexcept nogil:
    if v < 0.0:
        return 0.0
    if v > 2.0:
        return 2.0
    return v


def cosine_distance_matrix(A, B):
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], D = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, dot
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    na_arr = np.empty(n, dtype=np.float64)
    nb_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] na = na_arr, nb = nb_arr
    with nogil:
        for i in range(n):
            s = 0.0
            for k in range(D):
                s = s + a[i, k] * a[i, k]
            na[i] = s
        for j in range(m):
            s = 0.0
            for k in range(D):
                s = s + b[j, k] * b[j, k]
            nb[j] = s
        for i in range(n):
            for j in range(m):
                if na[i] < ZERO_NORM * ZERO_NORM or nb[j] < ZERO_NORM * ZERO_NORM:
                    out[i, j] = 1.0
                    continue
                dot = 0.0
                for k in range(D):
                    dot = dot + a[i, k] * b[j, k]
                # sqrt of the product keeps cos exactly +-1 for parallel rows
                out[i, j] = _clamp(1.0 - dot / sqrt(na[i] * nb[j]))
    return out_arr


def euclidean_distance_matrix(A, B):
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], D = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in range(n):
            for j in range(m):
                s = 0.0
                for k in range(D):
                    diff = a[i, k] - b[j, k]
                    s = s + diff * diff
                out[i, j] = sqrt(s)
    return out_arr


def knn_select(dist, allowed, Py_ssize_t k):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef cnp.uint8_t[:, ::1] ok = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef Py_ssize_t n = d.shape[0], m = d.shape[1]
    out_arr = np.full((n, k), -1, dtype=np.int64)
    if k == 0 or m == 0:
        return out_arr
    cdef cnp.int64_t[:, ::1] out = out_arr
    buf_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] best = buf_arr
    cdef Py_ssize_t i, j, filled, p
    cdef double v
    with nogil:
        for i in range(n):
            filled = 0
            for j in range(m):
                if not ok[i, j]:
                    continue
                v = d[i, j]
                # columns arrive in ascending order, so strict < keeps ties by index
                if filled == k and not (v < best[k - 1]):
                    continue
                if filled < k:
                    p = filled
                    filled += 1
                else:
                    p = k - 1
                while p > 0 and v < best[p - 1]:
                    best[p] = best[p - 1]
                    out[i, p] = out[i, p - 1]
                    p -= 1
                best[p] = v
                out[i, p] = j
    return out_arr


def signed_graph_loss(H, src, dst, phi, double margin):
    cdef double[:, ::1] h = np.ascontiguousarray(H, dtype=np.float64)
    cdef cnp.int64_t[::1] s_idx = np.ascontiguousarray(src, dtype=np.int64)
    cdef cnp.int64_t[::1] d_idx = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[::1] sign = np.ascontiguousarray(phi, dtype=np.float64)
    cdef Py_ssize_t n = h.shape[0], D = h.shape[1], E = s_idx.shape[0]
    grad_arr = np.zeros((n, D), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    norms_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] norms = norms_arr
    sq_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] sq = sq_arr
    cdef Py_ssize_t e, i, j, k
    cdef double acc, dot, na, nb, cos, dist, coef, total = 0.0
    with nogil:
        for i in range(n):
            acc = 0.0
            for k in range(D):
                acc = acc + h[i, k] * h[i, k]
            sq[i] = acc
            norms[i] = sqrt(acc)
        for e in range(E):
            i = s_idx[e]
            j = d_idx[e]
            na = norms[i]
            nb = norms[j]
            if na < ZERO_NORM or nb < ZERO_NORM:
                dist = 1.0
                coef = 0.0
                cos = 0.0
            else:
                dot = 0.0
                for k in range(D):
                    dot = dot + h[i, k] * h[j, k]
                cos = dot / sqrt(sq[i] * sq[j])
                dist = _clamp(1.0 - cos)
                coef = 1.0
            if sign[e] > 0:
                total = total + dist
            elif margin - dist > 0.0:
                total = total + (margin - dist)
                coef = -coef
            else:
                coef = 0.0
            if coef == 0.0:
                continue
            for k in range(D):
                grad[i, k] = grad[i, k] + coef * (-(h[j, k] / nb - cos * h[i, k] / na) / na)
                grad[j, k] = grad[j, k] + coef * (-(h[i, k] / na - cos * h[j, k] / nb) / nb)
    return total, grad_arr


def pegasos_train(X, y, double lam, order):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] lab = np.ascontiguousarray(y, dtype=np.float64)
    cdef cnp.int64_t[::1] idx = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t D = x.shape[1], T = idx.shape[0]
    w_arr = np.zeros(D, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef Py_ssize_t t, i, k
    cdef double eta, margin, scale
    with nogil:
        for t in range(T):
            i = idx[t]
            eta = 1.0 / (lam * (t + 1))
            margin = 0.0
            for k in range(D):
                margin = margin + w[k] * x[i, k]
            margin = lab[i] * margin
            scale = 1.0 - eta * lam
            for k in range(D):
                w[k] = w[k] * scale
            if margin < 1.0:
                for k in range(D):
                    w[k] = w[k] + (eta * lab[i]) * x[i, k]
    return w_arr
