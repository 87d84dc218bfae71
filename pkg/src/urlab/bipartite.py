"""Closed-form best correlation between a first-factor observable and any
second-factor observable, from the Schmidt form of a bipartite pure state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .commutant import hermitian_basis
from .errors import DimFactorMismatch, NotPure, ZeroDeviation
from .qcore import EPS_DEV, Observable, QuantumState, make_observable

SIGMA_SCHMIDT = 1e-12


@dataclass(frozen=True)
class SchmidtForm:
    coefficients: np.ndarray  # descending, all > SIGMA_SCHMIDT
    left_basis: np.ndarray    # columns |phi_n>
    right_basis: np.ndarray   # columns |chi_n>
    dims: tuple

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def projectors(self):
        """``(Pi_1, Pi_2)``: complements of the Schmidt supports in each factor."""
        P1 = np.eye(self.dims[0]) - self.left_basis @ self.left_basis.conj().T
        P2 = np.eye(self.dims[1]) - self.right_basis @ self.right_basis.conj().T
        return P1, P2

    def reconstruct(self) -> np.ndarray:
        return np.einsum("n,in,jn->ij", self.coefficients, self.left_basis,
                         self.right_basis).reshape(-1)


def schmidt_decompose(psi: QuantumState, d1: int, d2: int) -> SchmidtForm:
    if not psi.is_pure:
        raise NotPure("Schmidt decomposition needs a pure state")
    if d1 < 1 or d2 < 1 or d1 * d2 != psi.dim:
        raise DimFactorMismatch(f"dimension {psi.dim} is not {d1} x {d2}")
    U, s, Vh = np.linalg.svd(psi.vector.reshape(d1, d2), full_matrices=False)
    keep = s > SIGMA_SCHMIDT
    return SchmidtForm(s[keep], U[:, keep], Vh[keep].T, (d1, d2))


def _matrix_elements(schmidt, A):
    if A.dim != schmidt.dims[0]:
        raise DimFactorMismatch(f"observable {A.label!r} is not on the first factor")
    phi = schmidt.left_basis
    return phi.conj().T @ A.matrix @ phi


def projector_residue(schmidt: SchmidtForm, A: Observable) -> float:
    """``sum_m a_m^2 <phi_m| A Pi_1 A |phi_m>``: weight of A leaking off the Schmidt support."""
    P1, _ = schmidt.projectors
    phi = schmidt.left_basis
    leak = phi.conj().T @ A.matrix @ P1 @ A.matrix @ phi
    return float(np.sum(schmidt.coefficients**2 * leak.diagonal().real))


def _pieces(schmidt, A):
    a2 = schmidt.coefficients**2
    Amn = _matrix_elements(schmidt, A)
    absA2 = np.abs(Amn) ** 2
    mean = float(np.sum(a2 * Amn.diagonal().real))
    residue = projector_residue(schmidt, A)
    s = a2[:, None] + a2[None, :]
    var = float(np.sum(0.5 * s * absA2)) - mean**2 + residue
    return a2, Amn, absA2, mean, residue, s, var


def first_factor_variance(schmidt: SchmidtForm, A: Observable) -> float:
    return _pieces(schmidt, A)[-1]


def optimal_partner_observable(schmidt: SchmidtForm, A: Observable, lam: float = 1.0,
                               label="C") -> Observable:
    """Second-factor observable maximizing ``K(A, C)^2``, gauge ``<C> = 0``.

    In the Schmidt basis ``C_mn = lam * (2 a_m a_n / (a_m^2 + a_n^2) conj(A_mn) - <A> delta_mn)``;
    it vanishes off the Schmidt support.
    """
    if lam == 0:
        raise ValueError("lam must be non-zero")
    a2, Amn, _, mean, _, s, var = _pieces(schmidt, A)
    if var <= EPS_DEV**2:
        raise ZeroDeviation(A.label, math.sqrt(max(var, 0.0)))
    a = schmidt.coefficients
    Cmn = lam * ((2 * np.outer(a, a) / s) * Amn.conj() - mean * np.eye(len(a)))
    chi = schmidt.right_basis
    return make_observable(chi @ Cmn @ chi.conj().T, label)


def kmax_squared_forms(schmidt: SchmidtForm, A: Observable) -> tuple[float, float]:
    """``K^2_max`` written as one minus the losses, and as the direct ratio."""
    a2, _, absA2, mean, residue, s, var = _pieces(schmidt, A)
    if var <= EPS_DEV**2:
        raise ZeroDeviation(A.label, math.sqrt(max(var, 0.0)))
    d = a2[:, None] - a2[None, :]
    loss = float(np.sum(d * d / (2 * s) * absA2)) + residue
    via_losses = 1.0 - loss / var
    via_ratio = (float(np.sum(2 * np.outer(a2, a2) / s * absA2)) - mean**2) / var
    return via_losses, via_ratio


def kmax_squared(schmidt: SchmidtForm, A: Observable, tol=1e-10) -> float:
    """Largest ``K(A, C)^2`` over observables ``C`` on the second factor."""
    via_losses, via_ratio = kmax_squared_forms(schmidt, A)
    if abs(via_losses - via_ratio) > tol:
        raise AssertionError(
            f"closed forms disagree: {via_losses!r} vs {via_ratio!r}"
        )
    return float(min(1.0, max(0.0, via_losses)))


def embed_first(A: Observable, d2: int) -> Observable:
    m = np.kron(A.matrix, np.eye(d2))
    m.setflags(write=False)
    return Observable(m, A.label)


def embed_second(C: Observable, d1: int) -> Observable:
    m = np.kron(np.eye(d1), C.matrix)
    m.setflags(write=False)
    return Observable(m, C.label)


def second_factor_basis(d1: int, d2: int) -> np.ndarray:
    """``I_1 (x) E_k`` for the canonical Hermitian units of the second factor."""
    return np.array([np.kron(np.eye(d1), E) for E in hermitian_basis(d2)])


__all__ = [
    "SIGMA_SCHMIDT",
    "SchmidtForm",
    "embed_first",
    "embed_second",
    "first_factor_variance",
    "kmax_squared",
    "kmax_squared_forms",
    "optimal_partner_observable",
    "projector_residue",
    "schmidt_decompose",
    "second_factor_basis",
]
