# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in :mod:`urlab._pykernels`."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def gram_moments(const double complex[:, ::1] S, const double complex[:, :, ::1] mats):
    """Means, deviation vectors ``DX S`` and their Gram matrix for every ``X`` in ``mats``."""
    cdef Py_ssize_t m = mats.shape[0], d = S.shape[0], r = S.shape[1]
    cdef Py_ssize_t a, b, i, j, k
    cdef double complex acc, mu
    out_means = np.empty(m, dtype=np.complex128)
    out_devs = np.empty((m, d, r), dtype=np.complex128)
    out_gram = np.empty((m, m), dtype=np.complex128)
    cdef double complex[::1] means = out_means
    cdef double complex[:, :, ::1] devs = out_devs
    cdef double complex[:, ::1] gram = out_gram

    for a in range(m):
        for i in range(d):
            for k in range(r):
                acc = 0
                for j in range(d):
                    acc = acc + mats[a, i, j] * S[j, k]
                devs[a, i, k] = acc
        mu = 0
        for i in range(d):
            for k in range(r):
                mu = mu + S[i, k].conjugate() * devs[a, i, k]
        means[a] = mu
        for i in range(d):
            for k in range(r):
                devs[a, i, k] = devs[a, i, k] - mu.real * S[i, k]

    for a in range(m):
        for b in range(a, m):
            acc = 0
            for i in range(d):
                for k in range(r):
                    acc = acc + devs[a, i, k].conjugate() * devs[b, i, k]
            gram[a, b] = acc
            gram[b, a] = acc.conjugate()
    return out_means, out_devs, out_gram


def lagrange_gram_det(const double complex[::1] u, const double complex[::1] v):
    """``|u|^2 |v|^2 - |<u, v>|^2`` summed term by term, so it never goes negative."""
    cdef Py_ssize_t n = u.shape[0], i, j
    cdef double total = 0.0
    cdef double complex w
    for i in range(n):
        for j in range(i + 1, n):
            w = u[i] * v[j] - u[j] * v[i]
            total += w.real * w.real + w.imag * w.imag
    return total


def best_ratio(const double[::1] g, const double[:, ::1] M, const double[:, ::1] samples,
               double floor):
    """Index and value of the largest ``(g.c)^2 / c^T M c`` over the rows ``c`` of ``samples``."""
    cdef Py_ssize_t s = samples.shape[0], n = samples.shape[1]
    cdef Py_ssize_t t, i, j, best = -1
    cdef double num, den, row, val, best_val = -1.0
    for t in range(s):
        num = 0.0
        den = 0.0
        for i in range(n):
            num += g[i] * samples[t, i]
            row = 0.0
            for j in range(n):
                row += M[i, j] * samples[t, j]
            den += samples[t, i] * row
        if den <= floor:
            continue
        val = num * num / den
        if val > best_val:
            best_val = val
            best = t
    return best, best_val
