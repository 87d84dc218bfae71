import math

import numpy as np
import pytest

from urlab.errors import ZeroDeviation
from urlab.measures import (
    correlation_coefficient,
    deviation_overlap,
    effective_compatibility,
    one_minus_k2,
    overlap_geometry,
    upr,
)
from urlab.qcore import deviation_vector, make_observable, make_pure_state, moments

from .conftest import Oracle, rand_herm, rand_mixed, rand_pure

TILT = make_pure_state([math.cos(math.pi / 8), math.sin(math.pi / 8)])


class TestCorrelationCoefficient:
    def test_self(self, rng):
        s = rand_mixed(rng, 4)
        X = rand_herm(rng, 4)
        assert correlation_coefficient(s, X, X) == pytest.approx(1.0)

    def test_pauli_pair(self, paulis, ket0):
        assert correlation_coefficient(ket0, paulis[0], paulis[1]) == pytest.approx(0.0, abs=1e-15)

    def test_tilted_state(self, paulis):
        assert correlation_coefficient(TILT, paulis[2], paulis[0]) == pytest.approx(-1.0, abs=1e-12)

    def test_against_oracle(self, rng):
        for d in range(2, 7):
            s = rand_mixed(rng, d)
            X, Y = rand_herm(rng, d), rand_herm(rng, d)
            assert correlation_coefficient(s, X, Y) == pytest.approx(Oracle(s).cc(X.matrix, Y.matrix))

    def test_zero_deviation(self, paulis, ket0):
        with pytest.raises(ZeroDeviation):
            correlation_coefficient(ket0, paulis[2], paulis[0])

    def test_affine_invariance(self, rng):
        s = rand_pure(rng, 4)
        X, Y = rand_herm(rng, 4), rand_herm(rng, 4)
        k = correlation_coefficient(s, X, Y)
        X2 = make_observable(-3.0 * X.matrix + 2.0 * np.eye(4))
        assert correlation_coefficient(s, X2, Y) == pytest.approx(-k)


class TestOneMinusK2:
    def test_nonnegative_when_collinear(self, rng):
        s = rand_pure(rng, 5)
        X = rand_herm(rng, 5)
        Y = make_observable(2.5 * X.matrix + np.eye(5))
        ms = moments(s, [X, Y])
        assert 0.0 <= one_minus_k2(ms, 0, 1) < 1e-14

    def test_matches_naive(self, rng):
        s = rand_mixed(rng, 4)
        X, Y = rand_herm(rng, 4), rand_herm(rng, 4)
        ms = moments(s, [X, Y])
        k = correlation_coefficient(s, X, Y)
        assert one_minus_k2(ms, 0, 1) == pytest.approx(1 - k * k, rel=1e-10)


class TestUpr:
    def test_saturated_qubit(self, paulis, ket0):
        assert upr(ket0, paulis[0], paulis[1]).value == pytest.approx(1.0)

    def test_unconstrained(self, paulis):
        u = upr(make_pure_state([1, 1]), paulis[0], paulis[1])
        assert u.unconstrained and float(u) == math.inf

    def test_at_least_one(self, rng):
        for d in range(2, 7):
            s = rand_pure(rng, d)
            u = upr(s, rand_herm(rng, d), rand_herm(rng, d))
            assert float(u) >= 1 - 1e-12

    def test_gaussian_pair_analogue(self):
        from urlab.continuum import gaussian_pair_fock

        state, ops = gaussian_pair_fock(1, 4, levels=6)
        assert upr(state, ops["x1"], ops["p1"]).value == pytest.approx(1.25, abs=1e-6)


class TestCompatibility:
    def test_self(self, rng):
        s = rand_pure(rng, 3)
        B = rand_herm(rng, 3)
        ok, res = effective_compatibility(s, B, B)
        assert ok and res == 0.0

    def test_polynomial(self, rng):
        s = rand_mixed(rng, 4)
        B = rand_herm(rng, 4)
        f = make_observable(B.matrix @ B.matrix - 2 * B.matrix + np.eye(4))
        ok, res = effective_compatibility(s, B, f)
        assert ok and res <= 1e-9

    def test_paulis(self, paulis, ket0):
        ok, res = effective_compatibility(ket0, paulis[0], paulis[1])
        assert not ok and res == pytest.approx(2.0)


class TestOverlapGeometry:
    def test_all_same(self, rng):
        s = rand_pure(rng, 3)
        A = rand_herm(rng, 3)
        g = overlap_geometry(s, A, A, A)
        assert (g.a, g.b, g.x, g.y) == pytest.approx((1, 0, 1, 0))

    def test_pauli_case_by_vector_arithmetic(self, paulis, ket0):
        # deviation vectors: sx|0> = |1>, sy|0> = i|1>, so <psi_A|psi_B> = i
        g = overlap_geometry(ket0, paulis[0], paulis[1], paulis[1])
        assert (g.a, g.b, g.x, g.y) == pytest.approx((0, 1, 0, 1), abs=1e-15)
        va, vb = deviation_vector(ket0, paulis[0]), deviation_vector(ket0, paulis[1])
        assert np.vdot(va, vb) == pytest.approx(1j)

    def test_unit_disk(self, rng):
        s = rand_pure(rng, 4)
        A, B, C = (rand_herm(rng, 4) for _ in range(3))
        g = overlap_geometry(s, A, B, C)
        assert g.a**2 + g.b**2 <= 1 + 1e-9
        assert g.x**2 + g.y**2 <= 1 + 1e-9
        assert deviation_overlap(s, A, B) == pytest.approx(complex(g.a, g.b))
