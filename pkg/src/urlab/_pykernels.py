"""Numpy implementations of the hot loops.

These are the reference versions; ``_ckernels.pyx`` mirrors them one to one.
"""

import numpy as np


def gram_moments(S, mats):
    """Means, deviation vectors ``DX S`` and their Gram matrix for every ``X`` in ``mats``.

    ``S`` is a ``d x r`` factor of the state (``rho = S S^dagger``); a pure state
    is the ``d x 1`` column.  ``gram[a, b] = Tr(S^dagger DX_a DX_b S)``.
    """
    XS = np.matmul(mats, S)
    means = np.einsum("ik,aik->a", S.conj(), XS)
    devs = XS - means.real[:, None, None] * S[None, :, :]
    flat = devs.reshape(len(mats), -1)
    gram = flat.conj() @ flat.T
    gram = (gram + gram.conj().T) / 2  # BLAS need not return an exactly Hermitian product
    return means, devs, gram


def lagrange_gram_det(u, v):
    """``|u|^2 |v|^2 - |<u, v>|^2`` summed term by term, so it never goes negative."""
    w = np.outer(u, v) - np.outer(v, u)
    return 0.5 * float(np.sum(w.real**2 + w.imag**2))


def best_ratio(g, M, samples, floor):
    """Index and value of the largest ``(g.c)^2 / c^T M c`` over the rows ``c`` of ``samples``."""
    num = (samples @ g) ** 2
    den = np.einsum("ti,ij,tj->t", samples, M, samples)
    ok = den > floor
    if not np.any(ok):
        return -1, -1.0
    vals = np.where(ok, num / np.where(ok, den, 1.0), -1.0)
    best = int(np.argmax(vals))
    return best, float(vals[best])
