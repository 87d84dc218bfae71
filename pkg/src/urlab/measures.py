"""Correlation coefficients, uncertainty product ratios and overlap geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ZeroDeviation
from .qcore import EPS_DEV, TAU_N, QuantumState, moments

TAU_COMPAT = 1e-9


@dataclass(frozen=True)
class UprValue:
    """``2 dA dB / |<[A, B]>|``; ``value`` is ``None`` when the commutator vanishes."""

    value: float | None

    @property
    def unconstrained(self) -> bool:
        return self.value is None

    def __float__(self):
        return math.inf if self.value is None else self.value


@dataclass(frozen=True)
class OverlapGeometry:
    a: float
    b: float
    x: float
    y: float


def _require_dev(ms, *idx):
    for i in idx:
        if ms.dev[i] <= EPS_DEV:
            raise ZeroDeviation(ms.labels[i], float(ms.dev[i]))


def cc_from_moments(ms, i, j) -> float:
    """K(X_i, X_j), clamped to [-1, 1]."""
    _require_dev(ms, i, j)
    k = ms.anticomm_dev(i, j) / (2.0 * ms.dev[i] * ms.dev[j])
    return float(min(1.0, max(-1.0, k)))


def one_minus_k2(ms, i, j) -> float:
    """``1 - K^2`` from the Gram determinant, exact in sign.

    ``dX^2 dY^2 (1 - K^2) = (Im g)^2 + (dX^2 dY^2 - |g|^2)`` with ``g = <DX DY>``;
    both terms are non-negative, so no roundoff can push the radicand below 0.
    """
    _require_dev(ms, i, j)
    g = ms.gram[i, j]
    q = g.imag**2 + ms.gram_det(i, j)
    return float(min(1.0, q / (ms.var[i] * ms.var[j])))


def correlation_coefficient(state: QuantumState, X, Y) -> float:
    return cc_from_moments(moments(state, [X, Y]), 0, 1)


def upr_from_moments(ms, i, j) -> UprValue:
    c = abs(ms.comm(i, j))
    if c <= TAU_N:
        return UprValue(None)
    return UprValue(float(2.0 * ms.dev[i] * ms.dev[j] / c))


def upr(state: QuantumState, A, B) -> UprValue:
    return upr_from_moments(moments(state, [A, B]), 0, 1)


def compat_from_moments(ms, i, j, tol=TAU_COMPAT):
    residual = abs(ms.comm(i, j))
    scale = max(1.0, float(ms.dev[i] * ms.dev[j]))
    return residual <= tol * scale, float(residual)


def effective_compatibility(state: QuantumState, B, C, tol=TAU_COMPAT):
    """``(flag, |<[B, C]>|)``; the tolerance scales with ``dB dC`` once that exceeds 1."""
    return compat_from_moments(moments(state, [B, C]), 0, 1, tol)


def geometry_from_moments(ms, ia, ib, ic) -> OverlapGeometry:
    _require_dev(ms, ia, ib, ic)
    gab = ms.gram[ia, ib] / (ms.dev[ia] * ms.dev[ib])
    gac = ms.gram[ia, ic] / (ms.dev[ia] * ms.dev[ic])
    return OverlapGeometry(float(gab.real), float(gab.imag), float(gac.real), float(gac.imag))


def overlap_geometry(state: QuantumState, A, B, C) -> OverlapGeometry:
    """``<psi_A|psi_B> = a + ib`` and ``<psi_A|psi_C> = x + iy`` from the deviation vectors."""
    return geometry_from_moments(moments(state, [A, B, C]), 0, 1, 2)


def deviation_overlap(state: QuantumState, X, Y) -> complex:
    ms = moments(state, [X, Y])
    _require_dev(ms, 0, 1)
    return complex(ms.gram[0, 1] / (ms.dev[0] * ms.dev[1]))

