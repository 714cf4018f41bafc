# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled 1D convolution kernels (stride 1, zero padding, length preserving).

Layout is (batch, channels, samples), C-contiguous float64.  ``left`` is the
number of zeros padded before the first sample; output sample ``n`` reads input
samples ``n - left .. n - left + K - 1``.  All loops run in a fixed order so
results do not depend on scheduling.
"""
import numpy as np


def conv1d_forward(const double[:, :, ::1] x, const double[:, :, ::1] w,
                   const double[::1] b, Py_ssize_t left):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], N = x.shape[2]
    cdef Py_ssize_t Co = w.shape[0], K = w.shape[2]
    out_arr = np.empty((B, Co, N), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t bi, co, ci, k, n, lo, hi, s
    cdef double wv
    with nogil:
        for bi in range(B):
            for co in range(Co):
                for n in range(N):
                    out[bi, co, n] = b[co]
                for ci in range(Ci):
                    for k in range(K):
                        wv = w[co, ci, k]
                        s = k - left
                        lo = -s if s < 0 else 0
                        hi = N - s if s > 0 else N
                        for n in range(lo, hi):
                            out[bi, co, n] += wv * x[bi, ci, n + s]
    return out_arr


def conv1d_backward_input(const double[:, :, ::1] dy, const double[:, :, ::1] w,
                          Py_ssize_t left):
    cdef Py_ssize_t B = dy.shape[0], Co = dy.shape[1], N = dy.shape[2]
    cdef Py_ssize_t Ci = w.shape[1], K = w.shape[2]
    dx_arr = np.zeros((B, Ci, N), dtype=np.float64)
    cdef double[:, :, ::1] dx = dx_arr
    cdef Py_ssize_t bi, co, ci, k, n, lo, hi, s
    cdef double wv
    with nogil:
        for bi in range(B):
            for ci in range(Ci):
                for co in range(Co):
                    for k in range(K):
                        wv = w[co, ci, k]
                        s = k - left
                        lo = -s if s < 0 else 0
                        hi = N - s if s > 0 else N
                        for n in range(lo, hi):
                            dx[bi, ci, n + s] += wv * dy[bi, co, n]
    return dx_arr


def conv1d_backward_weight(const double[:, :, ::1] dy, const double[:, :, ::1] x,
                           Py_ssize_t K, Py_ssize_t left):
    cdef Py_ssize_t B = dy.shape[0], Co = dy.shape[1], N = dy.shape[2]
    cdef Py_ssize_t Ci = x.shape[1]
    dw_arr = np.zeros((Co, Ci, K), dtype=np.float64)
    db_arr = np.zeros(Co, dtype=np.float64)
    cdef double[:, :, ::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef Py_ssize_t bi, co, ci, k, n, lo, hi, s, m
    cdef double acc, a0, a1, a2, a3
    with nogil:
        for co in range(Co):
            for bi in range(B):
                acc = 0.0
                for n in range(N):
                    acc = acc + dy[bi, co, n]
                db[co] += acc
            for ci in range(Ci):
                for k in range(K):
                    s = k - left
                    lo = -s if s < 0 else 0
                    hi = N - s if s > 0 else N
                    # four independent partial sums, combined in a fixed order
                    a0 = 0.0
                    a1 = 0.0
                    a2 = 0.0
                    a3 = 0.0
                    for bi in range(B):
                        m = lo + ((hi - lo) // 4) * 4
                        n = lo
                        while n < m:
                            a0 = a0 + dy[bi, co, n] * x[bi, ci, n + s]
                            a1 = a1 + dy[bi, co, n + 1] * x[bi, ci, n + s + 1]
                            a2 = a2 + dy[bi, co, n + 2] * x[bi, ci, n + s + 2]
                            a3 = a3 + dy[bi, co, n + 3] * x[bi, ci, n + s + 3]
                            n = n + 4
                        for n in range(m, hi):
                            a0 = a0 + dy[bi, co, n] * x[bi, ci, n + s]
                    dw[co, ci, k] = (a0 + a1) + (a2 + a3)
    return dw_arr, db_arr
