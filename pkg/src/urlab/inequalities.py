"""Checkers for the generalized Robertson-Schroedinger family of inequalities.

Each checker returns an :class:`InequalityReport`.  ``slack`` is always the
margin by which the inequality holds (``lhs - rhs`` for ``>=`` relations,
``rhs - lhs`` for ``<=`` ones), and ``satisfied`` compares it, normalized by
``max(1, |larger side|)``, against ``-tol``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateTransform,
    NotEffectivelyCompatible,
    NotPure,
    UrlabError,
    ZeroDenominator,
    ZeroDeviation,
)
from .measures import (
    OverlapGeometry,
    cc_from_moments,
    compat_from_moments,
    geometry_from_moments,
    one_minus_k2,
)
from .qcore import (
    EPS_DEV,
    TAU_N,
    Observable,
    QuantumState,
    lift,
    make_pure_state,
    moments,
    purify,
)

TAU_SLACK = 1e-9
OMK_FLOOR = 1e-14  # 1 - K^2 below this is K^2 = 1 to working precision

CHECKERS = (
    "robertson_schroedinger",
    "generalized",
    "three_observable",
    "synge",
    "trifonov",
    "symmetric_sum",
    "geometric",
    "master",
)


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    degenerate: str | None = None
    witness: dict = field(default_factory=dict)
    labels: tuple = ()
    sense: str = ">="

    @property
    def relative_slack(self) -> float:
        scale = max(1.0, abs(self.lhs) if self.sense == ">=" else abs(self.rhs))
        if not math.isfinite(scale):
            return self.slack
        return self.slack / scale

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "labels": list(self.labels),
            "sense": self.sense,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "relative_slack": self.relative_slack,
            "satisfied": self.satisfied,
            "degenerate": self.degenerate,
            "witness": self.witness,
        }


def make_report(name, lhs, rhs, *, sense=">=", tol=TAU_SLACK, degenerate=None,
                witness=None, labels=(), satisfied=None) -> InequalityReport:
    lhs, rhs = float(lhs), float(rhs)
    big, small = (lhs, rhs) if sense == ">=" else (rhs, lhs)
    if math.isinf(big) and math.isinf(small):
        slack = 0.0
    else:
        slack = big - small
    rep = InequalityReport(name, lhs, rhs, slack, False, degenerate, witness or {},
                           tuple(labels), sense)
    rep.satisfied = bool(rep.relative_slack >= -tol) if satisfied is None else satisfied
    return rep


def _labels(*obs):
    return tuple(X.label for X in obs)


# -- two observables ---------------------------------------------------------

def rs_squared_slack(ms, i, j) -> float:
    """``4 dA^2 dB^2 - <i[A,B]>^2 - <{DA,DB}>^2``."""
    return 4 * ms.var[i] * ms.var[j] - ms.icomm(i, j) ** 2 - ms.anticomm_dev(i, j) ** 2


def _cc_bound(ms, ia, ib, ip, iq, name, labels, tol):
    """``2 dA dB >= |<[A,B]>| / sqrt(1 - K(P,Q)^2)``."""
    lhs = 2.0 * ms.dev[ia] * ms.dev[ib]
    c = abs(ms.comm(ia, ib))
    witness = {"commutator_abs": c}
    if min(ms.dev[ip], ms.dev[iq]) <= EPS_DEV:
        witness["K"] = None
        return make_report(name, lhs, c, tol=tol, degenerate="zero deviation",
                           witness=witness, labels=labels)
    k = cc_from_moments(ms, ip, iq)
    omk = one_minus_k2(ms, ip, iq)
    witness["K"] = k
    witness["one_minus_K2"] = omk
    if omk <= OMK_FLOOR:
        if c <= TAU_N:
            return make_report(name, lhs, 0.0, tol=tol, degenerate="0/0: K^2 = 1 and <[A,B]> = 0",
                               witness=witness, labels=labels, satisfied=True)
        return make_report(name, lhs, math.inf, tol=tol,
                           degenerate="K^2 = 1 with non-vanishing commutator",
                           witness=witness, labels=labels, satisfied=False)
    return make_report(name, lhs, c / math.sqrt(omk), tol=tol, witness=witness, labels=labels)


def check_robertson_schroedinger(state: QuantumState, A: Observable, B: Observable,
                                 tol=TAU_SLACK) -> InequalityReport:
    ms = moments(state, [A, B])
    return _cc_bound(ms, 0, 1, 0, 1, "robertson_schroedinger", _labels(A, B), tol)


def check_generalized_cc_bound(state, A, B, W, side="partner_of_B",
                               tol=TAU_SLACK) -> InequalityReport:
    """Robertson-Schroedinger with K(A,B) replaced by K(A,W) (W compatible with B)
    or by K(W,B) (W compatible with A)."""
    ms = moments(state, [A, B, W])
    if side == "partner_of_B":
        partner, ip, iq = 1, 0, 2
    elif side == "partner_of_A":
        partner, ip, iq = 0, 2, 1
    else:
        raise ValueError(f"unknown side {side!r}")
    ok, residual = compat_from_moments(ms, partner, 2)
    if not ok:
        raise NotEffectivelyCompatible(ms.labels[partner], W.label, residual)
    for i in (ip, iq):
        if ms.dev[i] <= EPS_DEV:
            raise ZeroDeviation(ms.labels[i], float(ms.dev[i]))
    rep = _cc_bound(ms, 0, 1, ip, iq, "generalized_cc_bound", _labels(A, B, W), tol)
    rep.witness["side"] = side
    rep.witness["compat_residual"] = residual
    return rep


# -- three observables -------------------------------------------------------

def _three(ms, a, b, c):
    """``(lhs, rhs)`` of the asymmetric three-observable relation."""
    v = ms.var
    cab, cbc, aca = ms.icomm(a, b), ms.icomm(b, c), ms.anticomm_dev(c, a)
    lhs = 4 * v[a] * v[b] * v[c]
    rhs = cab**2 * v[c] + cbc**2 * v[a] + aca**2 * v[b] + cab * cbc * aca
    return lhs, rhs, {"icomm_AB": cab, "icomm_BC": cbc, "anticomm_CA": aca}


def _zero_dev_note(ms, *idx):
    zero = [ms.labels[i] for i in idx if ms.dev[i] <= EPS_DEV]
    return f"zero deviation: {', '.join(zero)}" if zero else None


def check_three_observable(state, A, B, C, tol=TAU_SLACK) -> InequalityReport:
    ms = moments(state, [A, B, C])
    lhs, rhs, w = _three(ms, 0, 1, 2)
    return make_report("three_observable", lhs, rhs, tol=tol, witness=w,
                       degenerate=_zero_dev_note(ms, 0, 1, 2), labels=_labels(A, B, C))


_CYC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _symmetric_lhs(ms):
    v = ms.var
    return sum(v[a] * (4 * v[b] * v[c] - ms.icomm(b, c) ** 2 - ms.anticomm_dev(b, c) ** 2)
               for a, b, c in _CYC)


def check_synge(state, A, B, C, tol=TAU_SLACK) -> InequalityReport:
    ms = moments(state, [A, B, C])
    v = ms.var
    lhs = _symmetric_lhs(ms)
    F = (8 * v[0] * v[1] * v[2]
         - ms.anticomm_dev(0, 1) * ms.anticomm_dev(1, 2) * ms.anticomm_dev(2, 0)
         + sum(ms.icomm(a, b) * ms.anticomm_dev(b, c) * ms.icomm(c, a) for a, b, c in _CYC))
    rhs = 0.75 * abs(F) + 0.25 * F
    return make_report("synge", lhs, rhs, tol=tol, witness={"F": F},
                       degenerate=_zero_dev_note(ms, 0, 1, 2), labels=_labels(A, B, C))


def check_trifonov(state, X, Y, Z, tol=TAU_SLACK) -> InequalityReport:
    """Trifonov's relation with the anticommutator pair read as (X,Y)(X,Z).

    The form with (X,Y)(X,Y) is also evaluated and kept in the witness; it does
    not hold in general and does not affect ``satisfied``.
    """
    ms = moments(state, [X, Y, Z])
    v = ms.var
    lhs = 2 * v[0] * (v[1] + v[2])
    axy, axz = ms.anticomm_dev(0, 1), ms.anticomm_dev(0, 2)
    comm_term = abs(ms.icomm(0, 1) * ms.icomm(0, 2))
    rhs = abs(axy * axz) + comm_term
    rhs_repeated = abs(axy * axy) + comm_term
    w = {
        "rhs_repeated_factor": rhs_repeated,
        "slack_repeated_factor": lhs - rhs_repeated,
        "rs_mean": 0.5 * (axy**2 + ms.icomm(0, 1) ** 2 + axz**2 + ms.icomm(0, 2) ** 2),
    }
    return make_report("trifonov", lhs, rhs, tol=tol, witness=w,
                       degenerate=_zero_dev_note(ms, 0, 1, 2), labels=_labels(X, Y, Z))


def check_symmetric_sum(state, A, B, C, tol=TAU_SLACK) -> InequalityReport:
    """Cyclic sum of the three-observable relation; the rhs is also evaluated as
    the squared norm of ``sum_cyc DA|psi> <i[B,C]>``.

    Mixed states are handled through their purification (the factor of rho).
    """
    ms = moments(state, [A, B, C])
    v = ms.var
    lhs = _symmetric_lhs(ms)
    rhs = sum(v[a] * ms.icomm(b, c) ** 2
              + ms.icomm(a, b) * ms.anticomm_dev(b, c) * ms.icomm(c, a) for a, b, c in _CYC)
    w = {"rhs_vector_form": None, "forms_agree": None}
    note = _zero_dev_note(ms, 0, 1, 2)
    if note is None:
        vec = sum(ms.icomm(b, c) * ms.devs[a] for a, b, c in _CYC)
        rhs_vec = float(np.vdot(vec, vec).real)
        w["rhs_vector_form"] = rhs_vec
        w["forms_agree"] = abs(rhs_vec - rhs) <= TAU_N * max(1.0, abs(rhs))
    else:
        note += "; algebraic rhs only"
    return make_report("symmetric_sum", lhs, rhs, tol=tol, witness=w, degenerate=note,
                       labels=_labels(A, B, C))


def eigencondition_operator(state, A, B, C) -> Observable:
    """``<i[B,C]> A + <i[C,A]> B + <i[A,B]> C``.

    The state is an eigenvector of this operator exactly when the rhs of the
    symmetric-sum relation vanishes.
    """
    ms = moments(state, [A, B, C])
    m = ms.icomm(1, 2) * A.matrix + ms.icomm(2, 0) * B.matrix + ms.icomm(0, 1) * C.matrix
    m = np.array(m)
    m.setflags(write=False)
    return Observable(m, f"eig[{A.label},{B.label},{C.label}]")


def eigen_residual(state, M: Observable) -> float:
    """``|| M psi - <M> psi ||`` (Frobenius norm of ``DM S`` for mixed states)."""
    ms = moments(state, [M])
    return float(ms.dev[0])


# -- master inequality and the transformed state -----------------------------

def _need_pure(*states):
    for s in states:
        if not s.is_pure:
            raise NotPure("this check needs pure states; purify mixed states first")


def check_master_inequality(psi, psi_prime, A, tol=TAU_SLACK) -> InequalityReport:
    """``|<A>' - <A>| / (dA' + dA) <= tan(theta)`` with ``cos(theta) = |<psi|psi'>|``."""
    _need_pure(psi, psi_prime)
    m1, m2 = moments(psi, [A]), moments(psi_prime, [A])
    num = abs(float(m2.mean[0] - m1.mean[0]))
    den = float(m1.dev[0] + m2.dev[0])
    overlap = np.vdot(psi.vector, psi_prime.vector)
    cos_t = abs(overlap)
    # the orthogonal component gives sin(theta) without cancellation
    sin_t = float(np.linalg.norm(psi_prime.vector - overlap * psi.vector))
    w = {"cos_theta": float(cos_t), "sin_theta": sin_t, "mean_shift": num, "dev_sum": den}
    labels = (A.label,)
    tan_t = math.inf if cos_t <= 1e-15 else sin_t / cos_t
    if den <= EPS_DEV:
        if num <= TAU_N:
            return make_report("master", 0.0, tan_t, sense="<=", tol=tol, witness=w,
                               degenerate="0/0: both states are eigenstates with equal means",
                               labels=labels, satisfied=True)
        if math.isinf(tan_t):
            return make_report("master", math.inf, math.inf, sense="<=", tol=tol, witness=w,
                               degenerate="orthogonal eigenstates", labels=labels,
                               satisfied=True)
        raise ZeroDenominator("zero deviations with distinct means on non-orthogonal states")
    note = "orthogonal states: tan(theta) infinite" if math.isinf(tan_t) else None
    return make_report("master", num / den, tan_t, sense="<=", tol=tol, witness=w,
                       degenerate=note, labels=labels)


class Transformed(NamedTuple):
    state: QuantumState
    cos_theta: float
    tan_theta: float


def transform_state(psi, B, C, beta, gamma) -> Transformed:
    """``(I + i beta DB + gamma DC)|psi>`` normalized, with the closed-form angle."""
    _need_pure(psi)
    ms = moments(psi, [B, C])
    q = beta**2 * ms.var[0] + gamma**2 * ms.var[1] - beta * gamma * ms.icomm(0, 1)
    radicand = 1.0 + q
    if radicand <= TAU_N:
        raise DegenerateTransform(f"normalization radicand {radicand:.3g} vanishes")
    vec = psi.vector + 1j * beta * ms.devs[0, :, 0] + gamma * ms.devs[1, :, 0]
    cos_t = 1.0 / math.sqrt(radicand)
    tan_t = math.sqrt(max(q, 0.0))
    return Transformed(make_pure_state(vec), cos_t, tan_t)


# -- geometric form ----------------------------------------------------------

def geometric_report(g: OverlapGeometry, compat_residual=0.0, labels=(),
                     tol=TAU_SLACK) -> InequalityReport:
    """Unit-circle bound ``b^2 + x^2 <= 1`` and the confining ellipse.

    The reported sides belong to whichever of the two is tighter.
    """
    a, b, x, y = g.a, g.b, g.x, g.y
    circle = (1.0, b * b + x * x)
    ellipse = (1.0 - a * a - b * b, (1 - a * a) * x * x - 2 * a * b * x * y + (1 - b * b) * y * y)
    w = {
        "a": a, "b": b, "x": x, "y": y,
        "circle_slack": circle[0] - circle[1],
        "ellipse_slack": ellipse[0] - ellipse[1],
        "compat_residual": compat_residual,
    }
    lhs, rhs = min(circle, ellipse, key=lambda s: s[0] - s[1])
    return make_report("geometric", lhs, rhs, tol=tol, witness=w, labels=labels)


def check_geometric(state, A, B, C, tol=TAU_SLACK) -> InequalityReport:
    if not state.is_pure:
        d = state.dim
        state, A, B, C = purify(state), lift(A, d), lift(B, d), lift(C, d)
    ms = moments(state, [A, B, C])
    ok, residual = compat_from_moments(ms, 1, 2)
    if not ok:
        raise NotEffectivelyCompatible(B.label, C.label, residual)
    return geometric_report(geometry_from_moments(ms, 0, 1, 2), residual, _labels(A, B, C), tol)


# -- suite -------------------------------------------------------------------

def _degenerate_from_error(name, labels, err):
    return InequalityReport(name, 0.0, 0.0, 0.0, True, f"skipped: {err}", {}, labels)


def _default_workers():
    try:
        return max(1, int(os.environ.get("URLAB_THREADS", "1")))
    except ValueError:
        return 1


def _plan(state, obs, checkers, max_triples, state_prime):
    """Deterministic list of ``(name, fn, args)`` jobs."""
    jobs = []
    if "master" in checkers and state_prime is not None:
        for X in obs:
            jobs.append(("master", check_master_inequality, (state, state_prime, X)))
    if "robertson_schroedinger" in checkers:
        for X, Y in itertools.combinations(obs, 2):
            jobs.append(("robertson_schroedinger", check_robertson_schroedinger, (state, X, Y)))
    combos = list(itertools.combinations(obs, 3))
    if max_triples is not None:
        combos = combos[:max_triples]
    for trio in combos:
        ms = moments(state, trio)
        compat = {(i, j): compat_from_moments(ms, i, j)[0]
                  for i in range(3) for j in range(3) if i != j}
        if "synge" in checkers:
            jobs.append(("synge", check_synge, (state,) + trio))
        if "symmetric_sum" in checkers:
            jobs.append(("symmetric_sum", check_symmetric_sum, (state,) + trio))
        for p in itertools.permutations(range(3)):
            A, B, C = (trio[i] for i in p)
            if "three_observable" in checkers:
                jobs.append(("three_observable", check_three_observable, (state, A, B, C)))
            if compat[(p[1], p[2])]:
                if "generalized" in checkers:
                    jobs.append(("generalized", check_generalized_cc_bound, (state, A, B, C)))
                if "geometric" in checkers:
                    jobs.append(("geometric", check_geometric, (state, A, B, C)))
        if "trifonov" in checkers:
            for i in range(3):
                X = trio[i]
                Y, Z = (trio[j] for j in range(3) if j != i)
                jobs.append(("trifonov", check_trifonov, (state, X, Y, Z)))
    return jobs


def run_suite(state, observables, checkers=None, max_triples=None, state_prime=None,
              workers=None, tol=TAU_SLACK) -> list[InequalityReport]:
    """Run every applicable checker over the labeled observables.

    Observables are ordered by label; pairs are unordered, three-observable
    relations that are asymmetric run over ordered triples.  A failing check
    becomes a satisfied report marked ``skipped`` rather than aborting.
    """
    obs = sorted(observables, key=lambda X: X.label)
    if len(obs) < 2:
        raise ValueError("run_suite needs at least two observables")
    checkers = set(CHECKERS if checkers is None else checkers)
    unknown = checkers - set(CHECKERS)
    if unknown:
        raise ValueError(f"unknown checkers: {sorted(unknown)}")
    jobs = _plan(state, obs, checkers, max_triples, state_prime)

    def run(job):
        name, fn, args = job
        try:
            return fn(*args, tol=tol)
        except UrlabError as err:
            obs_args = [a for a in args if isinstance(a, Observable)]
            return _degenerate_from_error(name, _labels(*obs_args), err)

    workers = workers or _default_workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]
