"""Shared fixtures and independent oracles.

The oracles work directly with density matrices and traces, so they share no
code with the library's factor/Gram-matrix route.
"""

import numpy as np
import pytest

from urlab.qcore import make_mixed_state, make_observable, make_pure_state

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def paulis():
    return (make_observable(SX, "sx"), make_observable(SY, "sy"), make_observable(SZ, "sz"))


@pytest.fixture
def ket0():
    return make_pure_state([1, 0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def rand_herm(rng, d, label=""):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return make_observable((g + g.conj().T) / 2, label)


def rand_pure(rng, d):
    return make_pure_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))


def rand_mixed(rng, d, rank=None):
    rank = rank or int(rng.integers(1, d + 1))
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return make_mixed_state(rho / np.trace(rho).real)


def rand_state(rng, d, pure):
    return rand_pure(rng, d) if pure else rand_mixed(rng, d)


class Oracle:
    """Moments by explicit traces ``Tr(rho X Y)``."""

    def __init__(self, state):
        self.rho = np.asarray(state.density)

    def mean(self, X):
        return np.trace(self.rho @ X).real

    def dev_op(self, X):
        return X - self.mean(X) * np.eye(len(X))

    def var(self, X):
        D = self.dev_op(X)
        return np.trace(self.rho @ D @ D).real

    def comm(self, X, Y):
        return np.trace(self.rho @ (X @ Y - Y @ X))

    def icomm(self, X, Y):
        return (1j * self.comm(X, Y)).real

    def anti(self, X, Y):
        DX, DY = self.dev_op(X), self.dev_op(Y)
        return np.trace(self.rho @ (DX @ DY + DY @ DX)).real

    def cc(self, X, Y):
        return self.anti(X, Y) / (2 * np.sqrt(self.var(X) * self.var(Y)))


def mats(*obs):
    return [np.asarray(X.matrix) for X in obs]
