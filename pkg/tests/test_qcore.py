import math

import numpy as np
import pytest

from urlab.errors import (
    DimMismatch,
    NotHermitian,
    NotPositive,
    NotPure,
    NotSquare,
    TraceNotOne,
    ZeroDeviation,
    ZeroVector,
)
from urlab.qcore import (
    anticommutator_dev_expect,
    commutator_expect,
    deviation_vector,
    expectation,
    lift,
    make_mixed_state,
    make_observable,
    make_pure_state,
    moments,
    purify,
    rms_deviation,
)

from .conftest import SX, SZ, Oracle, rand_herm, rand_mixed, rand_pure

PLUS = make_pure_state([1, 1])
TILT = make_pure_state([math.cos(math.pi / 8), math.sin(math.pi / 8)])


class TestConstructors:
    def test_identity_observable(self):
        assert make_observable(np.eye(2), "I").dim == 2

    def test_sigma_x(self):
        X = make_observable(SX, "sx")
        np.testing.assert_array_equal(X.matrix, SX)
        assert X.label == "sx"

    def test_non_hermitian_rejected_with_label(self):
        with pytest.raises(NotHermitian, match="'bad'"):
            make_observable([[0, 1], [0, 0]], "bad")

    def test_non_square_rejected(self):
        with pytest.raises(NotSquare):
            make_observable(np.ones((2, 3)))

    def test_tiny_asymmetry_is_symmetrized(self):
        m = np.array([[1, 1 + 1e-13], [1, 0]])
        X = make_observable(m)
        np.testing.assert_array_equal(X.matrix, X.matrix.conj().T)

    def test_observable_is_read_only(self):
        X = make_observable(SX)
        with pytest.raises(ValueError):
            X.matrix[0, 0] = 5

    def test_pure_normalizes(self):
        s = make_pure_state([1, 1])
        np.testing.assert_allclose(s.vector, np.array([1, 1]) / math.sqrt(2))
        assert s.is_pure and s.dim == 2

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            make_pure_state([0, 0])

    @pytest.mark.parametrize("diag", [(0.5, 0.5), (0.75, 0.25)])
    def test_mixed_valid(self, diag):
        s = make_mixed_state(np.diag(diag))
        assert s.kind == "mixed"
        np.testing.assert_allclose(s.factor @ s.factor.conj().T, np.diag(diag), atol=1e-15)

    def test_mixed_not_positive(self):
        with pytest.raises(NotPositive):
            make_mixed_state(np.diag([2.0, -1.0]))

    def test_mixed_trace(self):
        with pytest.raises(TraceNotOne):
            make_mixed_state(np.diag([0.5, 0.6]))

    def test_mixed_hermitian(self):
        with pytest.raises(NotHermitian):
            make_mixed_state([[0.5, 0.1], [0.3, 0.5]])


class TestPurify:
    def test_maximally_mixed(self, paulis):
        p = purify(make_mixed_state(np.eye(2) / 2))
        assert p.dim == 4
        assert expectation(p, lift(paulis[2], 2)) == pytest.approx(0.0, abs=1e-15)
        assert abs(np.vdot(p.vector, np.array([1, 0, 0, 1]) / math.sqrt(2))) == pytest.approx(1.0)

    def test_pure_as_mixed_gives_product(self):
        p = purify(make_mixed_state(np.diag([1.0, 0.0])))
        reduced = p.vector.reshape(2, 2)
        assert np.linalg.matrix_rank(reduced, tol=1e-12) == 1

    def test_three_quarter(self, paulis):
        p = purify(make_mixed_state(np.diag([0.75, 0.25])))
        assert expectation(p, lift(paulis[2], 2)) == pytest.approx(0.5, abs=1e-14)

    def test_moments_preserved(self, rng):
        s = rand_mixed(rng, 4)
        A, B = rand_herm(rng, 4, "A"), rand_herm(rng, 4, "B")
        m1 = moments(s, [A, B])
        m2 = moments(purify(s), [lift(A, 4), lift(B, 4)])
        np.testing.assert_allclose(m1.gram, m2.gram, atol=1e-12)
        np.testing.assert_allclose(m1.mean, m2.mean, atol=1e-12)


class TestMoments:
    def test_expectation_examples(self, paulis, ket0):
        sx, _, sz = paulis
        assert expectation(ket0, sz) == pytest.approx(1.0)
        assert expectation(PLUS, sx) == pytest.approx(1.0)
        assert expectation(make_mixed_state(np.diag([0.75, 0.25])), sz) == pytest.approx(0.5)

    def test_rms_examples(self, paulis, ket0):
        sx, _, sz = paulis
        assert rms_deviation(ket0, sz) == pytest.approx(0.0, abs=1e-15)
        assert rms_deviation(ket0, sx) == pytest.approx(1.0)
        assert rms_deviation(make_mixed_state(np.eye(2) / 2), sz) == pytest.approx(1.0)

    def test_commutator_examples(self, paulis, ket0):
        sx, sy, _ = paulis
        assert commutator_expect(ket0, sx, sy) == pytest.approx(2j)
        assert commutator_expect(ket0, sx, sx) == 0
        assert commutator_expect(PLUS, sx, sy) == pytest.approx(0.0, abs=1e-15)

    def test_anticommutator_examples(self, paulis, ket0):
        sx, sy, sz = paulis
        assert anticommutator_dev_expect(ket0, sx, sy) == pytest.approx(0.0, abs=1e-15)
        assert anticommutator_dev_expect(TILT, sz, sx) == pytest.approx(-1.0, abs=1e-14)
        assert anticommutator_dev_expect(TILT, sx, sx) == pytest.approx(2 * rms_deviation(TILT, sx) ** 2)

    def test_against_trace_oracle(self, rng):
        for d, pure in [(2, True), (3, False), (5, True), (6, False)]:
            s = rand_pure(rng, d) if pure else rand_mixed(rng, d)
            X, Y = rand_herm(rng, d, "X"), rand_herm(rng, d, "Y")
            o = Oracle(s)
            ms = moments(s, [X, Y])
            assert ms.mean[0] == pytest.approx(o.mean(X.matrix))
            assert ms.var[1] == pytest.approx(o.var(Y.matrix))
            assert ms.comm(0, 1) == pytest.approx(o.comm(X.matrix, Y.matrix), abs=1e-12)
            assert ms.icomm(0, 1) == pytest.approx(o.icomm(X.matrix, Y.matrix), abs=1e-12)
            assert ms.anticomm_dev(0, 1) == pytest.approx(o.anti(X.matrix, Y.matrix), abs=1e-12)

    def test_invariants(self, rng):
        s = rand_mixed(rng, 5)
        X, Y = rand_herm(rng, 5, "X"), rand_herm(rng, 5, "Y")
        ms = moments(s, [X, Y])
        assert ms.comm(0, 1) == pytest.approx(-ms.comm(1, 0))
        assert ms.comm(0, 1).real == 0.0
        assert ms.anticomm_dev(0, 0) == pytest.approx(2 * ms.dev[0] ** 2)
        assert abs(ms.anticomm_dev(0, 1)) <= 2 * ms.dev[0] * ms.dev[1] + 1e-9
        gap = ms.var[0] * ms.var[1] - abs(ms.gram[0, 1]) ** 2
        assert ms.gram_det(0, 1) == pytest.approx(gap, rel=1e-9)

    def test_dim_mismatch(self, ket0):
        with pytest.raises(DimMismatch, match="'big'"):
            moments(ket0, [make_observable(np.eye(3), "big")])


class TestDeviationVector:
    def test_sigma_x_on_zero(self, paulis, ket0):
        np.testing.assert_allclose(deviation_vector(ket0, paulis[0]), [0, 1], atol=1e-15)

    def test_eigenstate(self, paulis, ket0):
        with pytest.raises(ZeroDeviation) as err:
            deviation_vector(ket0, paulis[2])
        assert err.value.label == "sz"

    def test_sigma_z_on_plus(self, paulis):
        np.testing.assert_allclose(deviation_vector(PLUS, paulis[2]), np.array([1, -1]) / math.sqrt(2),
                                   atol=1e-15)

    def test_orthogonal_unit(self, rng):
        s = rand_pure(rng, 6)
        v = deviation_vector(s, rand_herm(rng, 6))
        assert np.linalg.norm(v) == pytest.approx(1.0)
        assert abs(np.vdot(s.vector, v)) < 1e-12

    def test_mixed_rejected(self, paulis):
        with pytest.raises(NotPure):
            deviation_vector(make_mixed_state(np.eye(2) / 2), paulis[0])
