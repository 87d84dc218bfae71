import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urlab.commutant import project_to_effective_commutant
from urlab.errors import NotEffectivelyCompatible, NotPure, ZeroDeviation
from urlab.inequalities import (
    CHECKERS,
    check_generalized_cc_bound,
    check_geometric,
    check_master_inequality,
    check_robertson_schroedinger,
    check_symmetric_sum,
    check_synge,
    check_three_observable,
    check_trifonov,
    eigen_residual,
    eigencondition_operator,
    make_report,
    rs_squared_slack,
    run_suite,
    transform_state,
)
from urlab.qcore import deviation_vector, make_mixed_state, make_observable, make_pure_state, moments

from .conftest import Oracle, rand_herm, rand_mixed, rand_pure, rand_state

TILT = make_pure_state([math.cos(math.pi / 8), math.sin(math.pi / 8)])


def _triple(rng, d):
    return tuple(rand_herm(rng, d, lab) for lab in "ABC")


class TestReport:
    def test_ge_sense(self):
        r = make_report("x", 3.0, 1.0)
        assert r.slack == 2.0 and r.satisfied

    def test_le_sense_slack_is_margin(self):
        r = make_report("x", 1.0, 3.0, sense="<=")
        assert r.slack == 2.0 and r.satisfied
        assert not make_report("x", 3.0, 1.0, sense="<=").satisfied

    def test_relative_slack_scale(self):
        r = make_report("x", 1e6, 1e6 + 1e-4)
        assert r.relative_slack == pytest.approx(-1e-10)
        assert r.satisfied

    def test_both_infinite(self):
        r = make_report("x", math.inf, math.inf)
        assert r.slack == 0.0

    def test_as_dict_keys(self):
        d = make_report("x", 1.0, 0.5, labels=("A",)).as_dict()
        assert set(d) >= {"name", "lhs", "rhs", "slack", "relative_slack", "satisfied", "witness"}


class TestRobertsonSchroedinger:
    def test_saturating_qubit(self, paulis, ket0):
        r = check_robertson_schroedinger(ket0, paulis[0], paulis[1])
        assert (r.lhs, r.rhs) == pytest.approx((2.0, 2.0))
        assert abs(r.slack) <= 1e-12 and r.satisfied and r.degenerate is None

    def test_eigenstate(self, paulis, ket0, rng):
        r = check_robertson_schroedinger(ket0, paulis[2], paulis[0])
        assert r.lhs == 0.0 and r.rhs == pytest.approx(0.0) and r.satisfied and r.degenerate

    def test_perfectly_correlated_zero_over_zero(self, paulis):
        r = check_robertson_schroedinger(TILT, paulis[2], paulis[0])
        assert r.satisfied and "0/0" in r.degenerate

    def test_against_oracle(self, rng):
        for d in range(2, 8):
            s = rand_state(rng, d, d % 2 == 0)
            A, B = rand_herm(rng, d, "A"), rand_herm(rng, d, "B")
            o = Oracle(s)
            k2 = o.cc(A.matrix, B.matrix) ** 2
            c = abs(o.comm(A.matrix, B.matrix))
            r = check_robertson_schroedinger(s, A, B)
            assert r.lhs == pytest.approx(2 * math.sqrt(o.var(A.matrix) * o.var(B.matrix)))
            assert r.rhs == pytest.approx(c / math.sqrt(1 - k2), rel=1e-9)
            assert r.satisfied

    def test_squared_form(self, rng):
        s = rand_mixed(rng, 5)
        ms = moments(s, [rand_herm(rng, 5), rand_herm(rng, 5)])
        assert rs_squared_slack(ms, 0, 1) >= -1e-12

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 6), pure=st.booleans())
    def test_property(self, seed, d, pure):
        rng = np.random.default_rng(seed)
        s = rand_state(rng, d, pure)
        assert check_robertson_schroedinger(s, rand_herm(rng, d), rand_herm(rng, d)).satisfied


class TestGeneralized:
    def test_w_equal_b_reduces_to_rs(self, rng):
        s = rand_pure(rng, 4)
        A, B = rand_herm(rng, 4, "A"), rand_herm(rng, 4, "B")
        g = check_generalized_cc_bound(s, A, B, B)
        r = check_robertson_schroedinger(s, A, B)
        for f in ("lhs", "rhs", "slack"):
            assert getattr(g, f) == pytest.approx(getattr(r, f), abs=1e-12)

    def test_gaussian_pair_analogue_saturates(self):
        from urlab.continuum import gaussian_pair_fock

        state, ops = gaussian_pair_fock(1, 4, levels=10)
        r = check_generalized_cc_bound(state, ops["x1"], ops["p1"], ops["x2"])
        assert r.lhs**2 == pytest.approx(1.5625, abs=1e-6)
        assert r.rhs**2 == pytest.approx(1.5625, abs=1e-6)
        assert abs(r.slack) < 1e-12

    @pytest.mark.parametrize("side", ["partner_of_B", "partner_of_A"])
    def test_random_partner(self, rng, side):
        for _ in range(20):
            s = rand_pure(rng, 4)
            A, B = rand_herm(rng, 4, "A"), rand_herm(rng, 4, "B")
            target = B if side == "partner_of_B" else A
            W = project_to_effective_commutant(s, target, rand_herm(rng, 4), "W")
            r = check_generalized_cc_bound(s, A, B, W, side)
            o = Oracle(s)
            k = o.cc(A.matrix, W.matrix) if side == "partner_of_B" else o.cc(W.matrix, B.matrix)
            assert r.rhs == pytest.approx(abs(o.comm(A.matrix, B.matrix)) / math.sqrt(1 - k * k), rel=1e-8)
            assert r.satisfied
            assert r.witness["compat_residual"] < 1e-9

    def test_incompatible(self, paulis, ket0):
        with pytest.raises(NotEffectivelyCompatible) as err:
            check_generalized_cc_bound(ket0, paulis[2], paulis[0], paulis[1])
        assert err.value.residual == pytest.approx(2.0)

    def test_zero_deviation_partner(self, rng):
        s = rand_pure(rng, 3)
        A, B = rand_herm(rng, 3), rand_herm(rng, 3)
        with pytest.raises(ZeroDeviation):
            check_generalized_cc_bound(s, A, B, make_observable(np.eye(3), "I"))


class TestThreeObservable:
    def test_pauli_example(self, paulis, ket0):
        r = check_three_observable(ket0, *paulis)
        assert r.lhs == pytest.approx(0.0, abs=1e-15)
        assert r.rhs == pytest.approx(0.0, abs=1e-15)
        assert r.satisfied

    def test_c_equal_b(self, rng):
        s = rand_mixed(rng, 4)
        A, B = rand_herm(rng, 4), rand_herm(rng, 4)
        r = check_three_observable(s, A, B, B)
        ms = moments(s, [A, B])
        assert r.slack == pytest.approx(ms.var[1] * rs_squared_slack(ms, 0, 1), abs=1e-10)

    def test_against_oracle(self, rng):
        s = rand_pure(rng, 5)
        A, B, C = _triple(rng, 5)
        o = Oracle(s)
        a, b, c = A.matrix, B.matrix, C.matrix
        rhs = (o.icomm(a, b) ** 2 * o.var(c) + o.icomm(b, c) ** 2 * o.var(a)
               + o.anti(c, a) ** 2 * o.var(b) + o.icomm(a, b) * o.icomm(b, c) * o.anti(c, a))
        r = check_three_observable(s, A, B, C)
        assert r.rhs == pytest.approx(rhs, rel=1e-10)
        assert r.lhs == pytest.approx(4 * o.var(a) * o.var(b) * o.var(c), rel=1e-10)


class TestSynge:
    def test_commuting_diagonal(self):
        s = make_pure_state(np.ones(4))
        A, B, C = (make_observable(np.diag(v), lab) for v, lab in
                   [([1, -1, 1, -1], "A"), ([1, 1, -1, -1], "B"), ([1, -1, -1, 1], "C")])
        r = check_synge(s, A, B, C)
        assert r.witness["F"] == pytest.approx(8.0)
        assert r.lhs == pytest.approx(12.0)
        assert r.rhs == pytest.approx(8.0)
        assert r.satisfied

    def test_paulis(self, paulis, ket0):
        r = check_synge(ket0, *paulis)
        # dz = 0 leaves only the cyclic term dz^2(...) = 0 and two terms with icomm(x, y)^2 = 4
        assert r.lhs == pytest.approx(0.0, abs=1e-14)
        assert r.satisfied

    def test_random(self, rng):
        for d in range(2, 9):
            for pure in (True, False):
                assert check_synge(rand_state(rng, d, pure), *_triple(rng, d)).satisfied


class TestTrifonov:
    def test_z_equal_y_is_rs_square(self, rng):
        s = rand_pure(rng, 4)
        X, Y = rand_herm(rng, 4), rand_herm(rng, 4)
        r = check_trifonov(s, X, Y, Y)
        ms = moments(s, [X, Y])
        assert r.lhs == pytest.approx(4 * ms.var[0] * ms.var[1])
        assert r.rhs == pytest.approx(ms.anticomm_dev(0, 1) ** 2 + ms.icomm(0, 1) ** 2)

    def test_eigenstate(self, paulis, ket0):
        r = check_trifonov(ket0, paulis[2], paulis[0], paulis[1])
        assert r.lhs == 0.0 and r.rhs == pytest.approx(0.0)

    def test_am_gm_sandwich(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 8))
            r = check_trifonov(rand_mixed(rng, d), *_triple(rng, d))
            assert r.rhs <= r.witness["rs_mean"] * (1 + 1e-12) + 1e-12
            assert r.witness["rs_mean"] <= r.lhs * (1 + 1e-12) + 1e-12

    def test_printed_repetition_fails(self):
        # the (X,Y)(X,Y) form is violated by a plain qubit example and does not
        # decide the satisfied flag
        found = False
        rng = np.random.default_rng(3)
        for _ in range(200):
            s = rand_pure(rng, 2)
            X, Y, Z = _triple(rng, 2)
            r = check_trifonov(s, X, Y, Z)
            assert r.satisfied
            if r.witness["slack_repeated_factor"] < -1e-6:
                found = True
        assert found


class TestSymmetricSum:
    def test_forms_agree(self, rng):
        for d in range(2, 8):
            for pure in (True, False):
                r = check_symmetric_sum(rand_state(rng, d, pure), *_triple(rng, d))
                assert r.witness["forms_agree"]
                assert r.lhs >= r.rhs - 1e-9 and r.rhs >= -1e-12

    def test_vector_form_oracle(self, rng):
        s = rand_pure(rng, 4)
        A, B, C = _triple(rng, 4)
        o = Oracle(s)
        vec = sum(o.icomm(Y.matrix, Z.matrix) * (X.matrix - o.mean(X.matrix) * np.eye(4)) @ s.vector
                  for X, Y, Z in [(A, B, C), (B, C, A), (C, A, B)])
        assert check_symmetric_sum(s, A, B, C).rhs == pytest.approx(np.vdot(vec, vec).real, rel=1e-10)

    def test_paulis(self, paulis, ket0):
        r = check_symmetric_sum(ket0, *paulis)
        assert r.rhs == pytest.approx(0.0, abs=1e-14)
        assert r.degenerate and "algebraic" in r.degenerate

    def test_eigencondition(self, paulis, ket0):
        M = eigencondition_operator(ket0, *paulis)
        np.testing.assert_allclose(M.matrix, -2 * np.diag([1, -1]), atol=1e-15)
        assert eigen_residual(ket0, M) == pytest.approx(0.0, abs=1e-15)

    def test_residual_squared_is_rhs(self, rng):
        for _ in range(20):
            s = rand_pure(rng, 4)
            A, B, C = _triple(rng, 4)
            res = eigen_residual(s, eigencondition_operator(s, A, B, C))
            assert res**2 == pytest.approx(check_symmetric_sum(s, A, B, C).rhs, rel=1e-9, abs=1e-12)

    def test_eigenvector_gives_zero(self, paulis, rng):
        # for the Pauli triple the operator is -2 n.sigma (n the Bloch vector),
        # so every pure qubit state is an eigenvector of it
        for _ in range(10):
            s = rand_pure(rng, 2)
            M = eigencondition_operator(s, *paulis)
            assert eigen_residual(s, M) < 1e-12
            assert check_symmetric_sum(s, *paulis).rhs == pytest.approx(0.0, abs=1e-12)

    def test_commuting_triple_gives_zero_operator(self, rng):
        commuting = [make_observable(np.diag(rng.standard_normal(3)), f"D{i}") for i in range(3)]
        M0 = eigencondition_operator(rand_pure(rng, 3), *commuting)
        np.testing.assert_allclose(M0.matrix, 0, atol=1e-14)


class TestMaster:
    def test_same_state(self, rng):
        s = rand_pure(rng, 3)
        r = check_master_inequality(s, s, rand_herm(rng, 3))
        assert r.lhs == pytest.approx(0.0, abs=1e-14)
        assert r.rhs == pytest.approx(0.0, abs=1e-7) and r.satisfied

    def test_orthogonal(self, paulis):
        r = check_master_inequality(make_pure_state([1, 0]), make_pure_state([0, 1]), paulis[0])
        assert r.rhs == math.inf and r.satisfied

    def test_orthogonal_eigenstates(self, paulis):
        r = check_master_inequality(make_pure_state([1, 0]), make_pure_state([0, 1]), paulis[2])
        assert r.satisfied and r.degenerate

    def test_oracle(self, rng):
        for d in range(2, 9):
            s, t = rand_pure(rng, d), rand_pure(rng, d)
            A = rand_herm(rng, d)
            o1, o2 = Oracle(s), Oracle(t)
            lhs = abs(o1.mean(A.matrix) - o2.mean(A.matrix)) / (
                math.sqrt(o1.var(A.matrix)) + math.sqrt(o2.var(A.matrix)))
            c = abs(np.vdot(s.vector, t.vector))
            r = check_master_inequality(s, t, A)
            assert r.lhs == pytest.approx(lhs)
            assert r.rhs == pytest.approx(math.sqrt(1 - c * c) / c, rel=1e-8)
            assert r.sense == "<=" and r.satisfied

    def test_near_states(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 9))
            s = rand_pure(rng, d)
            t = make_pure_state(s.vector + 1e-5 * (rng.standard_normal(d) + 1j * rng.standard_normal(d)))
            assert check_master_inequality(s, t, rand_herm(rng, d)).satisfied

    def test_needs_pure(self, rng):
        with pytest.raises(NotPure):
            check_master_inequality(rand_mixed(rng, 2, 2), rand_pure(rng, 2), rand_herm(rng, 2))


class TestTransform:
    def test_identity(self, rng):
        s = rand_pure(rng, 3)
        t = transform_state(s, rand_herm(rng, 3), rand_herm(rng, 3), 0.0, 0.0)
        assert t.cos_theta == 1.0
        np.testing.assert_allclose(t.state.vector, s.vector)

    def test_sigma_x(self, paulis, ket0):
        beta = 0.1
        t = transform_state(ket0, paulis[0], paulis[1], beta, 0.0)
        assert t.cos_theta == pytest.approx(1 / math.sqrt(1 + beta**2))
        assert abs(np.vdot(ket0.vector, t.state.vector)) == pytest.approx(t.cos_theta, abs=1e-14)

    def test_random(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 7))
            s = rand_pure(rng, d)
            B, C = rand_herm(rng, d), rand_herm(rng, d)
            beta, gamma = rng.normal(size=2)
            t = transform_state(s, B, C, beta, gamma)
            assert t.cos_theta == pytest.approx(abs(np.vdot(s.vector, t.state.vector)), abs=1e-10)
            assert t.tan_theta == pytest.approx(math.tan(math.acos(min(1.0, t.cos_theta))), rel=1e-6)

    def test_radicand_never_below_one(self, rng):
        # the radicand is |(I + i beta DB + gamma DC) psi|^2 = 1 + |(...)psi|^2
        for _ in range(50):
            s = rand_pure(rng, 3)
            beta, gamma = 10 * rng.normal(size=2)
            t = transform_state(s, rand_herm(rng, 3), rand_herm(rng, 3), beta, gamma)
            assert 0.0 < t.cos_theta <= 1.0


class TestGeometric:
    def test_c_equal_b(self, rng):
        s = rand_pure(rng, 4)
        A, B = rand_herm(rng, 4, "A"), rand_herm(rng, 4, "B")
        r = check_geometric(s, A, B, B)
        w = r.witness
        assert w["a"] ** 2 + w["b"] ** 2 <= 1 + 1e-12
        assert w["circle_slack"] == pytest.approx(1 - w["a"] ** 2 - w["b"] ** 2)
        assert r.satisfied

    def test_vector_oracle(self, rng):
        s = rand_pure(rng, 5)
        A, B = rand_herm(rng, 5, "A"), rand_herm(rng, 5, "B")
        C = project_to_effective_commutant(s, B, rand_herm(rng, 5), "C")
        va, vb, vc = (deviation_vector(s, X) for X in (A, B, C))
        r = check_geometric(s, A, B, C)
        assert complex(r.witness["a"], r.witness["b"]) == pytest.approx(np.vdot(va, vb))
        assert complex(r.witness["x"], r.witness["y"]) == pytest.approx(np.vdot(va, vc))
        assert abs(np.vdot(vb, vc).imag) < 1e-9
        assert r.satisfied

    def test_mixed_through_purification(self, rng):
        s = rand_mixed(rng, 3)
        A, B = rand_herm(rng, 3, "A"), rand_herm(rng, 3, "B")
        C = project_to_effective_commutant(s, B, rand_herm(rng, 3), "C")
        assert check_geometric(s, A, B, C).satisfied

    def test_incompatible(self, paulis, ket0):
        with pytest.raises(NotEffectivelyCompatible):
            check_geometric(ket0, paulis[2], paulis[0], paulis[1])


class TestSuite:
    def test_pair_only(self, paulis, ket0):
        reps = run_suite(ket0, paulis[:2])
        assert [r.name for r in reps] == ["robertson_schroedinger"]

    def test_pauli_triple(self, paulis, ket0):
        reps = run_suite(ket0, list(paulis), checkers=["robertson_schroedinger", "three_observable"])
        names = [r.name for r in reps]
        assert names.count("three_observable") == 6
        assert names.count("robertson_schroedinger") == 3
        assert all(r.satisfied for r in reps)

    def test_cap_zero(self, paulis, ket0):
        reps = run_suite(ket0, list(paulis), max_triples=0)
        assert {r.name for r in reps} == {"robertson_schroedinger"}

    def test_errors_become_skipped(self, paulis, ket0):
        reps = run_suite(ket0, list(paulis))
        skipped = [r for r in reps if r.degenerate and r.degenerate.startswith("skipped")]
        assert all(r.satisfied for r in reps)
        assert all(len(r.labels) == 3 for r in skipped)

    def test_label_order_is_deterministic(self, rng):
        s = rand_pure(rng, 3)
        obs = [rand_herm(rng, 3, lab) for lab in "ZYX"]
        a = run_suite(s, obs)
        b = run_suite(s, list(reversed(obs)))
        assert [(r.name, r.labels, r.slack) for r in a] == [(r.name, r.labels, r.slack) for r in b]

    def test_threads_give_same_stream(self, rng, monkeypatch):
        s = rand_mixed(rng, 4)
        obs = [rand_herm(rng, 4, lab) for lab in "ABCD"]
        serial = run_suite(s, obs, state_prime=None, workers=1)
        monkeypatch.setenv("URLAB_THREADS", "4")
        threaded = run_suite(s, obs)
        assert [r.as_dict() for r in serial] == [r.as_dict() for r in threaded]

    def test_master_with_state_prime(self, rng):
        s, t = rand_pure(rng, 3), rand_pure(rng, 3)
        obs = [rand_herm(rng, 3, lab) for lab in "AB"]
        reps = run_suite(s, obs, state_prime=t)
        assert [r.name for r in reps].count("master") == 2

    def test_all_checkers_run(self, rng):
        s = rand_pure(rng, 4)
        B = rand_herm(rng, 4, "B")
        C = project_to_effective_commutant(s, B, rand_herm(rng, 4), "C")
        reps = run_suite(s, [rand_herm(rng, 4, "A"), B, C], state_prime=rand_pure(rng, 4))
        assert {r.name for r in reps} == {"robertson_schroedinger", "generalized_cc_bound",
                                          "three_observable", "synge", "trifonov",
                                          "symmetric_sum", "geometric", "master"}
        assert all(r.satisfied for r in reps)

    def test_unknown_checker(self, paulis, ket0):
        with pytest.raises(ValueError):
            run_suite(ket0, paulis[:2], checkers=["nope"])

    def test_needs_two(self, paulis, ket0):
        with pytest.raises(ValueError):
            run_suite(ket0, paulis[:1])

    def test_checker_names(self):
        assert len(CHECKERS) == 8 and len(set(CHECKERS)) == 8


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_all_pairs_of_basis_states(d):
    """Every computational basis state with every pair of random observables."""
    rng = np.random.default_rng(d)
    obs = [rand_herm(rng, d, f"O{i}") for i in range(3)]
    for k in range(d):
        s = make_pure_state(np.eye(d)[k])
        for X, Y in itertools.permutations(obs, 2):
            assert check_robertson_schroedinger(s, X, Y).satisfied
        assert check_synge(s, *obs).satisfied


def test_mixed_state_maximally_mixed_has_no_commutator(rng):
    s = make_mixed_state(np.eye(4) / 4)
    A, B = rand_herm(rng, 4), rand_herm(rng, 4)
    assert abs(moments(s, [A, B]).comm(0, 1)) < 1e-14
