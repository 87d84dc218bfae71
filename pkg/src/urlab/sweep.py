"""Seeded random sweeps: every checker on freshly drawn states and observables.

Instance ``i`` draws from its own child of ``SeedSequence(seed)``, so records
do not depend on thread scheduling or on how many instances run.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .commutant import project_to_effective_commutant
from .errors import UrlabError
from .inequalities import (
    CHECKERS,
    TAU_SLACK,
    check_generalized_cc_bound,
    check_geometric,
    check_master_inequality,
    check_robertson_schroedinger,
    check_symmetric_sum,
    check_synge,
    check_three_observable,
    check_trifonov,
)
from .qcore import (
    Observable,
    QuantumState,
    lift,
    make_mixed_state,
    make_observable,
    make_pure_state,
    purify,
)

RECORD_FIELDS = ("instance", "dim", "kind", "checker", "labels", "lhs", "rhs", "slack",
                 "relative_slack", "satisfied", "degenerate")


@dataclass
class SweepConfig:
    dims: tuple = (2, 3, 4, 5, 6, 7, 8)
    instances: int = 1000
    seed: int = 0
    checkers: tuple = CHECKERS
    tol: float = TAU_SLACK
    workers: int | None = None

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        self.dims = tuple(int(d) for d in self.dims)
        if not self.dims or min(self.dims) < 1:
            raise ValueError(f"dims must be positive, got {self.dims}")
        unknown = set(self.checkers) - set(CHECKERS)
        if unknown:
            raise ValueError(f"unknown checkers: {sorted(unknown)}")
        self.checkers = tuple(c for c in CHECKERS if c in set(self.checkers))


# -- random draws -------------------------------------------------------------

def random_hermitian(rng, d, label=""):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    scale = math.exp(rng.normal(0.0, 0.5))
    return make_observable(scale * (g + g.conj().T) / 2, label)


def random_pure(rng, d):
    return make_pure_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))


def random_mixed(rng, d):
    rank = int(rng.integers(1, d + 1))
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return make_mixed_state(rho / np.trace(rho).real)


def random_commutant_partner(rng, state, B, label):
    """Random Hermitian matrix projected so that ``<[B, C]> = 0`` in ``state``."""
    return project_to_effective_commutant(state, B, random_hermitian(rng, state.dim), label)


@dataclass
class Instance:
    index: int
    state: QuantumState
    A: Observable
    B: Observable
    C: Observable
    W: Observable        # effectively compatible with B (or with A, see side)
    side: str
    G: Observable        # effectively compatible with B, for the geometric check
    psi: QuantumState    # pure (purified when the instance is mixed)
    psi_prime: QuantumState
    A_pure: Observable   # A acting on psi's space
    meta: dict = field(default_factory=dict)


def draw_instance(index, seed_seq, dims) -> Instance:
    rng = np.random.default_rng(seed_seq)
    d = dims[index % len(dims)]
    kind = "pure" if index % 2 == 0 else "mixed"
    A, B, C = (random_hermitian(rng, d, lab) for lab in "ABC")
    if kind == "pure":
        if index % 10 == 8:
            # eigenstates of A exercise the zero-deviation branches
            state = make_pure_state(np.linalg.eigh(A.matrix)[1][:, int(rng.integers(d))])
        else:
            state = random_pure(rng, d)
    else:
        state = random_mixed(rng, d)
    side = "partner_of_B" if index % 4 < 2 else "partner_of_A"
    W = random_commutant_partner(rng, state, B if side == "partner_of_B" else A, "W")
    G = random_commutant_partner(rng, state, B, "C")
    if state.is_pure:
        psi, A_pure = state, A
    else:
        psi, A_pure = purify(state), lift(A, d)
    n = psi.dim
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi_prime = make_pure_state(psi.vector + math.exp(rng.normal(-1.0, 1.5)) * noise / math.sqrt(n))
    return Instance(index, state, A, B, C, W, side, G, psi, psi_prime, A_pure,
                    {"dim": d, "kind": kind})


def _run_checker(name, inst: Instance, tol):
    s, A, B, C = inst.state, inst.A, inst.B, inst.C
    if name == "robertson_schroedinger":
        return check_robertson_schroedinger(s, A, B, tol=tol)
    if name == "generalized":
        return check_generalized_cc_bound(s, A, B, inst.W, inst.side, tol=tol)
    if name == "three_observable":
        return check_three_observable(s, A, B, C, tol=tol)
    if name == "synge":
        return check_synge(s, A, B, C, tol=tol)
    if name == "trifonov":
        return check_trifonov(s, A, B, C, tol=tol)
    if name == "symmetric_sum":
        return check_symmetric_sum(s, A, B, C, tol=tol)
    if name == "geometric":
        return check_geometric(s, A, B, inst.G, tol=tol)
    if name == "master":
        return check_master_inequality(inst.psi, inst.psi_prime, inst.A_pure, tol=tol)
    raise ValueError(name)


def _record(inst, name, rep=None, error=None):
    rec = {"instance": inst.index, "dim": inst.meta["dim"], "kind": inst.meta["kind"],
           "checker": name}
    if rep is None:
        rec.update(labels="", lhs=0.0, rhs=0.0, slack=0.0, relative_slack=0.0,
                   satisfied=True, degenerate=f"skipped: {error}")
    else:
        rec.update(labels=",".join(rep.labels), lhs=rep.lhs, rhs=rep.rhs, slack=rep.slack,
                   relative_slack=rep.relative_slack, satisfied=rep.satisfied,
                   degenerate=rep.degenerate)
    return rec


def run_instance(index, seed_seq, config: SweepConfig) -> list[dict]:
    inst = draw_instance(index, seed_seq, config.dims)
    out = []
    for name in config.checkers:
        try:
            out.append(_record(inst, name, _run_checker(name, inst, config.tol)))
        except UrlabError as err:
            out.append(_record(inst, name, error=err))
    return out


def _workers(config):
    if config.workers:
        return config.workers
    try:
        return max(1, int(os.environ.get("URLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config: SweepConfig) -> list[dict]:
    """All records, ordered by instance then checker."""
    children = np.random.SeedSequence(config.seed).spawn(config.instances)
    jobs = list(enumerate(children))
    workers = _workers(config)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(lambda job: run_instance(job[0], job[1], config), jobs)
            return [r for chunk in chunks for r in chunk]
    return [r for i, ss in jobs for r in run_instance(i, ss, config)]


def summarize(records, tol=TAU_SLACK) -> dict:
    """Per checker: count, minimum slack (absolute and relative), violations, degenerate count."""
    out = {}
    for r in records:
        s = out.setdefault(r["checker"], {"count": 0, "min_slack": math.inf,
                                          "min_relative_slack": math.inf,
                                          "violations": 0, "degenerate": 0})
        s["count"] += 1
        s["min_slack"] = min(s["min_slack"], r["slack"])
        s["min_relative_slack"] = min(s["min_relative_slack"], r["relative_slack"])
        if not r["satisfied"] or r["relative_slack"] < -tol:
            s["violations"] += 1
        if r["degenerate"]:
            s["degenerate"] += 1
    return out


def records_to_csv(records) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow({k: ("" if r[k] is None else r[k]) for k in RECORD_FIELDS})
    return buf.getvalue()


def records_to_jsonl(records) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)


__all__ = [
    "SweepConfig",
    "draw_instance",
    "random_hermitian",
    "random_mixed",
    "random_pure",
    "records_to_csv",
    "records_to_jsonl",
    "run_instance",
    "run_sweep",
    "summarize",
]
