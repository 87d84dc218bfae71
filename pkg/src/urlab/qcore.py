"""States, observables and first/second moments.

Every state is carried internally as a factor ``S`` with ``rho = S S^dagger``
(``d x 1`` for a pure state, ``d x rank`` for a mixed one), so pure and mixed
moments share one code path: ``<X Y> = Tr(S^dagger X Y S)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import (
    DimMismatch,
    NotHermitian,
    NotPositive,
    NotPure,
    NotSquare,
    TraceNotOne,
    ZeroDeviation,
    ZeroVector,
)

TAU_H = 1e-10
TAU_N = 1e-9
EPS_DEV = 1e-12


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def _square(matrix, what="matrix"):
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotSquare(f"{what} must be a non-empty square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(m):
    """Largest elementwise deviation from Hermiticity relative to ``max(1, |m|_max)``."""
    scale = max(1.0, float(np.max(np.abs(m))))
    return float(np.max(np.abs(m - m.conj().T))) / scale


@dataclass(frozen=True, eq=False)
class Observable:
    matrix: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self):
        return f"Observable({self.label!r}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class QuantumState:
    dim: int
    kind: str  # "pure" | "mixed"
    vector: np.ndarray | None = None
    rho: np.ndarray | None = None
    factor: np.ndarray = field(repr=False, default=None)

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    @cached_property
    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.outer(self.vector, self.vector.conj())


def make_observable(matrix, label="") -> Observable:
    m = _square(matrix)
    defect = hermiticity_defect(m)
    if defect > TAU_H:
        name = f" {label!r}" if label else ""
        raise NotHermitian(f"observable{name} deviates from Hermitian by {defect:.3g}")
    return Observable(_frozen((m + m.conj().T) / 2), str(label))


def make_pure_state(vector) -> QuantumState:
    v = np.asarray(vector, dtype=np.complex128).ravel()
    norm = np.linalg.norm(v)
    if v.size == 0 or norm == 0.0:
        raise ZeroVector("state vector is zero")
    v = _frozen(v / norm)
    return QuantumState(v.size, "pure", vector=v, factor=_frozen(v[:, None]))


def make_mixed_state(rho) -> QuantumState:
    r = _square(rho, "density matrix")
    defect = hermiticity_defect(r)
    if defect > TAU_H:
        raise NotHermitian(f"density matrix deviates from Hermitian by {defect:.3g}")
    r = (r + r.conj().T) / 2
    tr = np.trace(r).real
    if abs(tr - 1.0) > TAU_N:
        raise TraceNotOne(f"density matrix trace is {tr!r}")
    w, V = np.linalg.eigh(r)
    if w[0] < -TAU_N:
        raise NotPositive(f"density matrix has eigenvalue {w[0]:.3g}")
    keep = w > 0.0
    S = V[:, keep] * np.sqrt(w[keep])
    if S.shape[1] == 0:
        raise NotPositive("density matrix has no positive eigenvalue")
    return QuantumState(r.shape[0], "mixed", rho=_frozen(r), factor=_frozen(S))


def as_state(obj) -> QuantumState:
    """Accept a state, a vector or a density matrix."""
    if isinstance(obj, QuantumState):
        return obj
    a = np.asarray(obj)
    return make_pure_state(a) if a.ndim == 1 else make_mixed_state(a)


def purify(state: QuantumState) -> QuantumState:
    """Pure state on ``d*d`` whose ``X (x) I`` moments equal those of ``state``.

    Built from the eigendecomposition ``rho = sum_k p_k |e_k><e_k|`` as
    ``sum_k sqrt(p_k) |e_k>|k>``.
    """
    d = state.dim
    if state.is_pure:
        S = np.zeros((d, d), dtype=np.complex128)
        S[:, 0] = state.vector
    else:
        w, V = np.linalg.eigh(state.rho)
        S = V * np.sqrt(np.clip(w, 0.0, None))
    return make_pure_state(S.reshape(-1))


def lift(X: Observable, ancilla_dim: int) -> Observable:
    """``X (x) I`` on the purified space."""
    return Observable(_frozen(np.kron(X.matrix, np.eye(ancilla_dim))), X.label)


def _check_dims(state, *obs):
    for X in obs:
        if X.dim != state.dim:
            raise DimMismatch(
                f"observable {X.label!r} has dim {X.dim}, state has dim {state.dim}"
            )


@dataclass(frozen=True)
class MomentSet:
    """Cached first and second moments of a collection of observables.

    ``gram[i, j] = <DX_i DX_j>``; everything else is read off it:
    ``dev_i^2 = gram[i, i]``, ``<[X_i, X_j]> = 2i Im gram[i, j]`` and
    ``<{DX_i, DX_j}> = 2 Re gram[i, j]``.
    """

    labels: tuple
    mean: np.ndarray
    gram: np.ndarray
    devs: np.ndarray = field(repr=False)

    @property
    def var(self):
        return np.clip(self.gram.diagonal().real, 0.0, None)

    @property
    def dev(self):
        return np.sqrt(self.var)

    def comm(self, i, j) -> complex:
        return 2j * self.gram[i, j].imag

    def icomm(self, i, j) -> float:
        """``<i[X_i, X_j]>``, real for Hermitian inputs."""
        return -2.0 * float(self.gram[i, j].imag)

    def anticomm_dev(self, i, j) -> float:
        return 2.0 * float(self.gram[i, j].real)

    def gram_det(self, i, j) -> float:
        """``dev_i^2 dev_j^2 - |gram[i, j]|^2`` without cancellation."""
        return kernels.lagrange_gram_det(self.devs[i], self.devs[j])


def moments(state: QuantumState, observables) -> MomentSet:
    observables = list(observables)
    _check_dims(state, *observables)
    mats = np.stack([X.matrix for X in observables])
    means, devs, gram = kernels.gram_moments(state.factor, mats)
    if np.max(np.abs(means.imag), initial=0.0) > TAU_N * max(1.0, float(np.max(np.abs(means)))):
        raise NotHermitian("expectation value has a non-negligible imaginary part")
    return MomentSet(tuple(X.label for X in observables), means.real, gram, devs)


def expectation(state: QuantumState, X: Observable) -> float:
    return float(moments(state, [X]).mean[0])


def rms_deviation(state: QuantumState, X: Observable) -> float:
    g = moments(state, [X]).gram[0, 0].real
    if g < -TAU_N:
        raise NotPositive(f"negative variance {g:.3g} for {X.label!r}")
    return float(np.sqrt(max(g, 0.0)))


def commutator_expect(state: QuantumState, X: Observable, Y: Observable) -> complex:
    ms = moments(state, [X, Y])
    # <XY> - <YX>; the real part cancels identically for Hermitian X, Y
    return ms.comm(0, 1)


def anticommutator_dev_expect(state: QuantumState, X: Observable, Y: Observable) -> float:
    return moments(state, [X, Y]).anticomm_dev(0, 1)


def deviation_vector(state: QuantumState, X: Observable) -> np.ndarray:
    """``DX|psi> / dX``: a unit vector orthogonal to ``|psi>``."""
    if not state.is_pure:
        raise NotPure("deviation vectors are defined for pure states; purify first")
    ms = moments(state, [X])
    dev = float(ms.dev[0])
    if dev <= EPS_DEV:
        raise ZeroDeviation(X.label, dev)
    return ms.devs[0, :, 0] / dev
