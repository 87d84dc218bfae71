"""Search of the effective commutant of one observable for the partner most
correlated with another.

A Hermitian ``C`` is written in real coordinates ``c`` over a fixed basis
(diagonal units first, then the real and imaginary off-diagonal units in
row-major upper-triangle order).  For a state factor ``S``:

* ``<{DA, DC}>/2 = g . c``      with ``g_k = Re <DA S, DE_k S>``
* ``dC^2        = c^T M c``     with ``M_kl = Re <DE_k S, DE_l S>``
* ``<[B, C]>    = 2i (l . c)``  with ``l_k = Im <DB S, DE_k S>``

so ``K(A, C)^2 = (g.c)^2 / (dA^2 c^T M c)`` is maximized over the hyperplane
``l.c = 0`` by a pseudo-inverse of ``M`` restricted to that hyperplane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ZeroDeviation
from .measures import TAU_COMPAT, UprValue, compat_from_moments, upr_from_moments
from .qcore import EPS_DEV, TAU_N, Observable, QuantumState, moments

SIGMA_CUT = 1e-10
ELL_FLOOR = 1e-12
K2_FLOOR = 1e-20


def hermitian_basis(d: int) -> np.ndarray:
    """``d*d`` Hermitian units in canonical order; ``C = sum_k c_k E_k``."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            re = np.zeros((d, d), dtype=np.complex128)
            re[i, j] = re[j, i] = 1.0
            im = np.zeros((d, d), dtype=np.complex128)
            im[i, j], im[j, i] = 1j, -1j
            basis += [re, im]
    return np.array(basis)


def to_coords(matrix) -> np.ndarray:
    m = np.asarray(matrix)
    d = m.shape[0]
    iu = np.triu_indices(d, 1)
    off = m[iu]
    return np.concatenate([m.diagonal().real, np.column_stack([off.real, off.imag]).ravel()])


def from_coords(c, basis) -> np.ndarray:
    return np.tensordot(np.asarray(c, dtype=float), basis, axes=1)


def commutant_algebra_basis(B: Observable, tol=1e-9) -> np.ndarray:
    """Hermitian basis of the operators that commute with ``B`` exactly."""
    w, U = np.linalg.eigh(B.matrix)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups, start = [], 0
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > tol * scale:
            groups.append(list(range(start, k)))
            start = k
    basis = []
    for grp in groups:
        Ug = U[:, grp]
        for E in hermitian_basis(len(grp)):
            basis.append(Ug @ E @ Ug.conj().T)
    return np.array(basis)


@dataclass(frozen=True)
class QuadraticProblem:
    """Linear and quadratic forms of the correlation problem over a basis."""

    basis: np.ndarray
    g: np.ndarray
    M: np.ndarray
    ell: np.ndarray | None
    var_a: float
    dev_a: float


def quadratic_problem(state: QuantumState, A: Observable, B: Observable | None,
                      basis=None) -> QuadraticProblem:
    if basis is None:
        basis = hermitian_basis(state.dim)
    head = [A.matrix] + ([B.matrix] if B is not None else [])
    _, _, gram = kernels.gram_moments(state.factor, np.concatenate([np.array(head), basis]))
    h = len(head)
    var_a = float(gram[0, 0].real)
    ell = gram[1, h:].imag.copy() if B is not None else None
    return QuadraticProblem(basis, gram[0, h:].real.copy(), gram[h:, h:].real.copy(), ell,
                            var_a, math.sqrt(max(var_a, 0.0)))


def _restrict(prob: QuadraticProblem):
    """Projector onto the hyperplane ``l.c = 0`` (identity when unconstrained)."""
    n = len(prob.g)
    ell = prob.ell
    if ell is None or np.linalg.norm(ell) <= ELL_FLOOR:
        return None
    u = ell / np.linalg.norm(ell)
    return np.eye(n) - np.outer(u, u)


@dataclass
class SearchResult:
    C: Observable
    k_squared: float
    tightened_rhs: float
    compat_residual: float
    method: str
    iterations: int
    note: str | None = None
    witness: dict = field(default_factory=dict)


def _normalized(state, A, B, c, basis, label):
    """Zero-mean, unit-deviation observable from coordinates, oriented so K >= 0."""
    mat = from_coords(c, basis)
    mat = (mat + mat.conj().T) / 2
    ms = moments(state, [Observable(mat, label), A])
    dev = float(ms.dev[0])
    if dev <= EPS_DEV:
        return None
    mat = (mat - ms.mean[0] * np.eye(state.dim)) / dev
    if ms.anticomm_dev(0, 1) < 0:
        mat = -mat
    mat.setflags(write=False)
    return Observable(mat, label)


def _result(state, A, B, C, method, iterations, note, witness):
    obs = [A, C] + ([B] if B is not None else [])
    ms = moments(state, obs)
    if ms.dev[1] > EPS_DEV:
        k = ms.anticomm_dev(0, 1) / (2 * ms.dev[0] * ms.dev[1])
        k2 = float(min(1.0, k * k))
    else:
        k2 = 0.0
    if B is not None:
        c = abs(ms.comm(0, 2))
        residual = float(abs(ms.comm(1, 2)))
    else:
        c, residual = 0.0, 0.0
    if c <= TAU_N:
        rhs = 0.0
    elif k2 >= 1.0:
        rhs = math.inf
    else:
        rhs = c / math.sqrt(1.0 - k2)
    return SearchResult(C, k2, rhs, residual, method, iterations, note, witness)


def _fallback_partner(state, A, B, prob, P, label):
    """Any admissible unit-deviation partner, used when the optimum is not unique."""
    if B is not None:
        C = _normalized(state, A, B, to_coords(B.matrix), hermitian_basis(state.dim), label)
        if C is not None and _compatible(state, B, C):
            return C
    Q = prob.M if P is None else P @ prob.M @ P
    w, V = np.linalg.eigh(Q)
    C = _normalized(state, A, B, V[:, -1], prob.basis, label)
    if C is None:
        return Observable(np.zeros((state.dim, state.dim), dtype=np.complex128), label)
    return C


def _compatible(state, B, C):
    return compat_from_moments(moments(state, [B, C]), 0, 1)[0]


def maximize_cc_in_commutant(state: QuantumState, A: Observable, B: Observable | None,
                             basis=None, strict=False, label="C") -> SearchResult:
    """Largest ``K(A, C)^2`` over observables ``C`` with ``<[B, C]> = 0``.

    ``B=None`` drops the constraint (useful with a restricted ``basis``);
    ``strict=True`` searches the operator commutant of ``B`` instead of the
    effective one.
    """
    if strict and B is not None:
        basis = commutant_algebra_basis(B)
    prob = quadratic_problem(state, A, None if strict else B, basis)
    if prob.dev_a <= EPS_DEV:
        raise ZeroDeviation(A.label, prob.dev_a)
    P = _restrict(prob)
    h = prob.g if P is None else P @ prob.g
    Q = prob.M if P is None else P @ prob.M @ P
    w, V = np.linalg.eigh(Q)
    keep = w > SIGMA_CUT * max(float(w[-1]), 0.0)
    proj = V[:, keep].T @ h
    z = V[:, keep] @ (proj / w[keep])
    value = float(proj @ (proj / w[keep]))
    k2_quadratic = value / prob.var_a
    witness = {"k_squared_quadratic": k2_quadratic, "rank": int(keep.sum()),
               "coordinates": len(prob.g)}
    note = None
    C = None
    if k2_quadratic > K2_FLOOR:
        C = _normalized(state, A, B, z, prob.basis, label)
    if C is None:
        note = "no correlated direction in the commutant: K_max = 0"
        C = _fallback_partner(state, A, B, prob, P, label)
    method = "closed_form" if not strict else "closed_form_strict"
    return _result(state, A, B, C, method, len(prob.g), note, witness)


def brute_force_cc_max(state: QuantumState, A: Observable, B: Observable | None,
                       samples: int, seed=0, basis=None, batch=4096,
                       label="C") -> SearchResult:
    """Best ``K(A, C)^2`` among random Hermitian ``C`` projected onto ``l.c = 0``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    prob = quadratic_problem(state, A, B, basis)
    if prob.dev_a <= EPS_DEV:
        raise ZeroDeviation(A.label, prob.dev_a)
    P = _restrict(prob)
    rng = np.random.default_rng(seed)
    n = len(prob.g)
    floor = 1e-12 * max(float(np.trace(prob.M)), 1e-300)
    best_val, best_c = -1.0, None
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        cs = rng.standard_normal((m, n))
        if P is not None:
            cs = cs @ P
        i, val = kernels.best_ratio(prob.g, prob.M, cs, floor)
        if i >= 0 and val > best_val:
            best_val, best_c = val, cs[i].copy()
        done += m
    C = None
    if best_c is not None:
        C = _normalized(state, A, B, best_c, prob.basis, label)
    if C is None:
        return _result(state, A, B, Observable(np.zeros((state.dim,) * 2, complex), label),
                       "random_oracle", samples, "no sample with positive variance", {})
    return _result(state, A, B, C, "random_oracle", samples, None,
                   {"k_squared_quadratic": best_val / prob.var_a})


def project_to_effective_commutant(state: QuantumState, B: Observable, C: Observable,
                                   label=None) -> Observable:
    """Closest (in coordinates) observable to ``C`` with ``<[B, C']> = 0``."""
    basis = hermitian_basis(state.dim)
    prob = quadratic_problem(state, B, B, basis)
    c = to_coords(C.matrix)
    P = _restrict(prob)
    if P is not None:
        c = P @ c
    mat = from_coords(c, basis)
    mat = (mat + mat.conj().T) / 2
    mat.setflags(write=False)
    return Observable(mat, C.label if label is None else label)


class TightenedBound(NamedTuple):
    upr: UprValue
    best_over_B_commutant: float
    best_over_A_commutant: float
    partner_of_B: SearchResult
    partner_of_A: SearchResult


def _upr_bound(result: SearchResult, unconstrained: bool) -> float:
    if unconstrained:
        return 0.0
    if result.k_squared >= 1.0:
        return math.inf
    return 1.0 / math.sqrt(1.0 - result.k_squared)


def tightened_bound(state: QuantumState, A: Observable, B: Observable, strict=False) -> TightenedBound:
    """UPR of ``(A, B)`` next to the two lower bounds from the best commutant partners.

    With a vanishing commutator the UPR is unconstrained and both bounds are 0.
    """
    upr = upr_from_moments(moments(state, [A, B]), 0, 1)
    for_b = maximize_cc_in_commutant(state, A, B, strict=strict, label="C")
    for_a = maximize_cc_in_commutant(state, B, A, strict=strict, label="D")
    return TightenedBound(upr, _upr_bound(for_b, upr.unconstrained),
                          _upr_bound(for_a, upr.unconstrained), for_b, for_a)


__all__ = [
    "QuadraticProblem",
    "SearchResult",
    "TAU_COMPAT",
    "TightenedBound",
    "brute_force_cc_max",
    "commutant_algebra_basis",
    "from_coords",
    "hermitian_basis",
    "maximize_cc_in_commutant",
    "project_to_effective_commutant",
    "quadratic_problem",
    "tightened_bound",
    "to_coords",
]
