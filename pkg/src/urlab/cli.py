"""``urlab`` command line.

Exit codes: 0 when every report holds (degenerate counts as holding), 2 when
any inequality is violated, 1 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bipartite as bp
from . import continuum as ct
from .commutant import brute_force_cc_max, maximize_cc_in_commutant, tightened_bound
from .errors import UrlabError
from .inequalities import CHECKERS, TAU_SLACK, InequalityReport, run_suite
from .io import ProblemFileError, encode_matrix, load_problem
from .qcore import make_observable, make_pure_state
from .sweep import SweepConfig, records_to_csv, records_to_jsonl, run_sweep, summarize

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def render_table(rows, columns) -> str:
    cells = [[_fmt(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    line = lambda vals: "  ".join(v.ljust(w) for v, w in zip(vals, widths)).rstrip()  # noqa: E731
    out = [line(columns), line(["-" * w for w in widths])]
    out += [line(row) for row in cells]
    return "\n".join(out) + "\n"


def render_csv(rows, columns) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: _jsonable(r.get(c)) for c in columns})
    return buf.getvalue()


def render_jsonl(rows) -> str:
    return "".join(json.dumps(_jsonable(r)) + "\n" for r in rows)


REPORT_COLUMNS = ["name", "labels", "sense", "lhs", "rhs", "slack", "relative_slack",
                  "satisfied", "degenerate"]


def _report_rows(reports: list[InequalityReport]):
    rows = []
    for r in reports:
        d = r.as_dict()
        d["labels"] = ",".join(r.labels)
        rows.append(d)
    return rows


def emit(rows, columns, fmt, output=None, stream=None):
    """Print rows in ``fmt``; ``output`` also receives the machine form (JSON lines or CSV)."""
    stream = stream or sys.stdout
    if fmt == "json":
        text = render_jsonl(rows)
    elif fmt == "csv":
        text = render_csv(rows, columns)
    else:
        text = render_table(rows, columns)
    stream.write(text)
    if output:
        machine = render_csv(rows, columns) if fmt == "csv" else render_jsonl(rows)
        Path(output).write_text(machine)


def emit_document(doc, fmt, output=None, stream=None):
    """Single structured result: JSON document, or a flattened key/value table."""
    stream = stream or sys.stdout
    text = json.dumps(_jsonable(doc), indent=2) + "\n"
    if fmt == "json":
        stream.write(text)
    else:
        flat = []
        for k, v in doc.items():
            if isinstance(v, (dict, list)):
                v = json.dumps(_jsonable(v))
                if len(v) > 100:
                    v = v[:97] + "..."
            flat.append({"key": k, "value": v})
        stream.write(render_table(flat, ["key", "value"]) if fmt == "table"
                     else render_csv(flat, ["key", "value"]))
    if output:
        Path(output).write_text(text)


def _option(args, problem, name, default):
    val = getattr(args, name, None)
    if val is not None:
        return val
    if problem is not None and name in problem.options:
        return problem.options[name]
    return default


# -- commands -------------------------------------------------------------------

def cmd_check(args) -> int:
    problem = load_problem(args.problem)
    tol = float(_option(args, problem, "tol_slack", TAU_SLACK))
    if problem.state.kind == "grid":
        wf = problem.build_state()
        reports = [ct.check_estimator_bound(wf, tol=max(tol, 1e-6))]
    else:
        state = problem.build_state()
        observables = problem.build_observables()
        if len(observables) < 2:
            raise ProblemFileError("observables", "need at least two observables")
        checkers = args.checkers or problem.options.get("checkers")
        max_triples = _option(args, problem, "max_triples", None)
        reports = run_suite(state, observables, checkers=checkers, max_triples=max_triples,
                            state_prime=problem.build_state_prime(), tol=tol)
    emit(_report_rows(reports), REPORT_COLUMNS, args.format, args.output)
    return EXIT_OK if all(r.satisfied for r in reports) else EXIT_VIOLATION


def _search_doc(res, direction):
    return {
        "direction": direction,
        "method": res.method,
        "k_squared": res.k_squared,
        "tightened_rhs": res.tightened_rhs,
        "compat_residual": res.compat_residual,
        "iterations": res.iterations,
        "note": res.note,
        "C": encode_matrix(res.C.matrix),
    }


def cmd_search(args) -> int:
    problem = load_problem(args.problem)
    state = problem.build_state()
    if problem.state.kind == "grid":
        raise ProblemFileError("state.kind", "commutant search needs a finite-dimensional state")
    A, B = problem.observable(args.A), problem.observable(args.B)
    seed = int(_option(args, problem, "seed", 0))
    samples = int(_option(args, problem, "oracle_samples", 0))
    tb = tightened_bound(state, A, B, strict=args.strict)
    doc = {
        "A": A.label,
        "B": B.label,
        "upr": tb.upr.value,
        "upr_unconstrained": tb.upr.unconstrained,
        "bound_from_partner_of_B": tb.best_over_B_commutant,
        "bound_from_partner_of_A": tb.best_over_A_commutant,
        "partner_of_B": _search_doc(tb.partner_of_B, f"max K({A.label}, C), <[{B.label}, C]> = 0"),
        "partner_of_A": _search_doc(tb.partner_of_A, f"max K({B.label}, D), <[{A.label}, D]> = 0"),
    }
    if samples > 0:
        doc["oracle_partner_of_B"] = _search_doc(
            brute_force_cc_max(state, A, B, samples, seed=seed), "oracle")
        doc["oracle_partner_of_A"] = _search_doc(
            brute_force_cc_max(state, B, A, samples, seed=seed + 1, label="D"), "oracle")
    emit_document(doc, args.format, args.output)
    return EXIT_OK


def _dims(args, problem):
    if args.dims:
        d1, d2 = args.dims
        if d1 * d2 != problem.state.dim:
            raise ProblemFileError("--dims", f"{d1} x {d2} does not match dimension {problem.state.dim}")
        return d1, d2
    if problem.factor_dims is None:
        raise ProblemFileError("factor_dims", "missing (or pass --dims D1 D2)")
    return problem.factor_dims


def bipartite_doc(state, A, d1, d2):
    sch = bp.schmidt_decompose(state, d1, d2)
    via_losses, via_ratio = bp.kmax_squared_forms(sch, A)
    C = bp.optimal_partner_observable(sch, A)
    return {
        "dims": [d1, d2],
        "A": A.label,
        "schmidt_coefficients": [float(a) for a in sch.coefficients],
        "kmax_squared": bp.kmax_squared(sch, A),
        "kmax_squared_losses_form": via_losses,
        "kmax_squared_ratio_form": via_ratio,
        "projector_residue": bp.projector_residue(sch, A),
        "variance_A": bp.first_factor_variance(sch, A),
        "C": encode_matrix(C.matrix),
    }


def cmd_bipartite(args) -> int:
    problem = load_problem(args.problem)
    state = problem.build_state()
    d1, d2 = _dims(args, problem)
    labels = [lab for lab, _ in problem.observables]
    if args.A not in labels:
        raise ProblemFileError("observables", f"no observable labelled {args.A!r}")
    m = dict(problem.observables)[args.A]
    if m.shape[0] == d1 * d2:
        raise ProblemFileError(f"observables ({args.A!r})", f"give A as a {d1}x{d1} first-factor matrix")
    try:
        A = make_observable(m, args.A)
    except UrlabError as exc:
        raise ProblemFileError(f"observables ({args.A!r})", str(exc)) from exc
    if A.dim != d1:
        raise ProblemFileError(f"observables ({args.A!r})", f"is {A.dim}x{A.dim}, first factor has dimension {d1}")
    emit_document(bipartite_doc(state, A, d1, d2), args.format, args.output)
    return EXIT_OK


SWEEP_COLUMNS = ["checker", "count", "min_slack", "min_relative_slack", "violations", "degenerate"]


def cmd_sweep(args) -> int:
    cfg = SweepConfig(dims=tuple(args.dims), instances=args.instances, seed=args.seed or 0,
                      checkers=tuple(args.checkers or CHECKERS),
                      tol=args.tol_slack if args.tol_slack is not None else TAU_SLACK)
    records = run_sweep(cfg)
    if args.output:
        text = records_to_csv(records) if args.format == "csv" else records_to_jsonl(records)
        Path(args.output).write_text(text)
    summary = summarize(records, cfg.tol)
    rows = [{"checker": k, **v} for k, v in summary.items()]
    if args.format == "json":
        sys.stdout.write(json.dumps(_jsonable({"config": {"dims": list(cfg.dims),
                                                          "instances": cfg.instances,
                                                          "seed": cfg.seed},
                                               "summary": summary}), indent=2) + "\n")
    elif args.format == "csv":
        sys.stdout.write(render_csv(rows, SWEEP_COLUMNS))
    else:
        sys.stdout.write(render_table(rows, SWEEP_COLUMNS))
    return EXIT_VIOLATION if any(v["violations"] for v in summary.values()) else EXIT_OK


# -- demos ----------------------------------------------------------------------

CHIRP_COLUMNS = ["c", "k2_grid", "k2_analytic", "k2_operator_x", "squared_upr", "bound_rhs",
                 "bound_slack"]


def demo_heisenberg_chirp(chirps=(0.0, 0.125, 0.25, 0.5, 1.0, 2.0), sigma=1.0, n=256):
    rows, ok = [], True
    for c in chirps:
        wf = ct.gaussian_wavepacket(sigma, n, chirp=c)
        rep = ct.check_estimator_bound(wf, tol=1e-6)
        ok &= rep.satisfied
        try:
            kx = ct.cc_f_p_operator(wf, wf.x) ** 2
        except UrlabError:
            kx = float("nan")
        rows.append({"c": c, "k2_grid": ct.optimal_estimator_cc(wf),
                     "k2_analytic": ct.chirped_gaussian_k2(sigma, c), "k2_operator_x": kx,
                     "squared_upr": rep.lhs, "bound_rhs": rep.rhs, "bound_slack": rep.slack})
    return rows, CHIRP_COLUMNS, ok


PAIR_COLUMNS = ["a", "b", "squared_upr_analytic", "inverse_one_minus_k2_analytic",
                "squared_upr_grid", "inverse_one_minus_k2_grid", "K_x1_x2", "K_x1_p1",
                "geom_a", "geom_b", "geom_x", "geom_y", "circle_slack", "ellipse_slack"]


def demo_gaussian_pair(a=1, bs=(1, 2, 3, 4, 8), n=128):
    rows, ok = [], True
    for b in bs:
        rep = ct.verify_gaussian_saturation(a, b, n=n)
        geo = ct.check_gaussian_geometric(ct.gaussian_pair_state(a, b, n=n))
        ok &= rep.satisfied and geo.satisfied
        w, g = rep.witness, geo.witness
        rows.append({"a": a, "b": b,
                     "squared_upr_analytic": w["analytic_squared_upr"],
                     "inverse_one_minus_k2_analytic": w["analytic_inverse_one_minus_k2"],
                     "squared_upr_grid": w["grid_squared_upr"],
                     "inverse_one_minus_k2_grid": w["grid_inverse_one_minus_k2"],
                     "K_x1_x2": w["grid_K_x1_x2"], "K_x1_p1": w["grid_K_x1_p1"],
                     "geom_a": g["a"], "geom_b": g["b"], "geom_x": g["x"], "geom_y": g["y"],
                     "circle_slack": g["circle_slack"], "ellipse_slack": g["ellipse_slack"]})
    return rows, PAIR_COLUMNS, ok


BIPARTITE_COLUMNS = ["case", "schmidt_coefficients", "kmax_squared", "kmax_squared_losses_form",
                     "kmax_squared_ratio_form", "solver_k_squared", "projector_residue"]


def demo_bipartite():
    sx = make_observable([[0, 1], [1, 0]], "sx")
    s3 = math.sqrt(3) / 2
    cases = {
        "sqrt3/2,1/2": make_pure_state([s3, 0, 0, 0.5]),
        "bell": make_pure_state([1, 0, 0, 1]),
        "product": make_pure_state([1, 0, 0, 0]),
    }
    rows, ok = [], True
    for name, psi in cases.items():
        sch = bp.schmidt_decompose(psi, 2, 2)
        try:
            doc = bipartite_doc(psi, sx, 2, 2)
            solver = maximize_cc_in_commutant(psi, bp.embed_first(sx, 2), None,
                                              basis=bp.second_factor_basis(2, 2)).k_squared
        except UrlabError as exc:  # product state: sx has zero spread in |0>
            doc = {"kmax_squared": 0.0, "kmax_squared_losses_form": None,
                   "kmax_squared_ratio_form": None, "projector_residue": None}
            solver = None
            name += f" ({exc.__class__.__name__})"
        ok &= solver is None or abs(solver - doc["kmax_squared"]) <= 1e-6
        rows.append({"case": name,
                     "schmidt_coefficients": " ".join(f"{a:.6g}" for a in sch.coefficients),
                     "kmax_squared": doc["kmax_squared"],
                     "kmax_squared_losses_form": doc["kmax_squared_losses_form"],
                     "kmax_squared_ratio_form": doc["kmax_squared_ratio_form"],
                     "solver_k_squared": solver,
                     "projector_residue": doc["projector_residue"]})
    return rows, BIPARTITE_COLUMNS, ok


DEMOS = {
    "heisenberg-chirp": demo_heisenberg_chirp,
    "gaussian-pair": demo_gaussian_pair,
    "bipartite": demo_bipartite,
}


def cmd_demo(args) -> int:
    rows, columns, ok = DEMOS[args.example]()
    out = None
    if args.output:
        folder = Path(args.output)
        folder.mkdir(parents=True, exist_ok=True)
        stem = args.example.replace("-", "_")
        (folder / f"{stem}.csv").write_text(render_csv(rows, columns))
        if args.example == "gaussian-pair":
            geo = [{"a": r["geom_a"], "b": r["geom_b"], "x": r["geom_x"], "y": r["geom_y"]}
                   for r in rows]
            (folder / "ellipse.csv").write_text(render_csv(geo, ["a", "b", "x", "y"]))
    emit(rows, columns, args.format, out)
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser ---------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1 so that 2 keeps meaning "violation"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--tol-slack", type=float, default=None, dest="tol_slack",
                        help=f"relative slack tolerance (default {TAU_SLACK:g})")
    common.add_argument("--oracle-samples", type=int, default=None, dest="oracle_samples",
                        help="random-oracle samples for the commutant search")
    common.add_argument("--output", default=None, help="file (or directory for demo) for machine-readable output")
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")

    p = _Parser(prog="urlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="run inequality checkers on a problem file")
    c.add_argument("problem")
    c.add_argument("--checkers", nargs="+", choices=CHECKERS, default=None)
    c.add_argument("--max-triples", type=int, default=None, dest="max_triples")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("search", parents=[common], help="best commutant partners for A and B")
    s.add_argument("problem")
    s.add_argument("A")
    s.add_argument("B")
    s.add_argument("--strict", action="store_true", help="search the operator commutant instead")
    s.set_defaults(func=cmd_search)

    b = sub.add_parser("bipartite", parents=[common], help="closed-form K^2 max for a bipartite state")
    b.add_argument("problem")
    b.add_argument("A")
    b.add_argument("--dims", type=int, nargs=2, default=None, metavar=("D1", "D2"))
    b.set_defaults(func=cmd_bipartite)

    w = sub.add_parser("sweep", parents=[common], help="seeded random sweep of all checkers")
    w.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7, 8])
    w.add_argument("--instances", type=int, default=1000)
    w.add_argument("--checkers", nargs="+", choices=CHECKERS, default=None)
    w.set_defaults(func=cmd_sweep)

    d = sub.add_parser("demo", parents=[common], help="reproduce a worked example")
    d.add_argument("example", choices=sorted(DEMOS))
    d.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UrlabError, ValueError) as exc:
        print(f"urlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
