# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: resampling, framing, row deltas, row cosines.

Contracts mirror ``_kernels_np``; the dispatcher guarantees float64
C-contiguous inputs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

BACKEND = "cython"


def resample_linear(const double[::1] x, Py_ssize_t n_out, double ratio):
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_out, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, lo
    cdef double pos, w
    for i in range(n_out):
        pos = i * ratio
        lo = <Py_ssize_t>pos
        if lo >= n - 1:
            o[i] = x[n - 1]
        else:
            w = pos - lo
            o[i] = x[lo] * (1.0 - w) + x[lo + 1] * w
    return out


def preemphasis(const double[::1] x, double coeff):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    o[0] = x[0]
    for i in range(1, n):
        o[i] = x[i] - coeff * x[i - 1]
    return out


def frame_windows(const double[::1] x, Py_ssize_t frame_len, Py_ssize_t hop, const double[::1] window):
    cdef Py_ssize_t n_frames = (x.shape[0] - frame_len) // hop + 1
    cdef cnp.ndarray[double, ndim=2] out = np.empty((n_frames, frame_len), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t t, j, base
    for t in range(n_frames):
        base = t * hop
        for j in range(frame_len):
            o[t, j] = x[base + j] * window[j]
    return out


def mean_abs_rowdiff(const double[:, ::1] m):
    cdef Py_ssize_t rows = m.shape[0]
    cdef Py_ssize_t cols = m.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(rows - 1, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t t, j
    cdef double acc
    for t in range(rows - 1):
        acc = 0.0
        for j in range(cols):
            acc += fabs(m[t + 1, j] - m[t, j])
        o[t] = acc / cols
    return out


def rowwise_cosine(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t cols = a.shape[1]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(rows, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef double dot, na, nb, prod
    for i in range(rows):
        dot = 0.0
        na = 0.0
        nb = 0.0
        for j in range(cols):
            dot += a[i, j] * b[i, j]
            na += a[i, j] * a[i, j]
            nb += b[i, j] * b[i, j]
        prod = sqrt(na) * sqrt(nb)
        if prod > 0.0:
            o[i] = dot / prod
    return out
