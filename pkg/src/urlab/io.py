"""JSON problem files.

Complex numbers are written as ``[re, im]`` pairs (a bare real number is
accepted on input); matrices are nested row-major lists.  A problem looks like::

    {
      "state": {"kind": "pure", "vector": [[1, 0], [0, 0]]},
      "observables": [{"label": "sx", "matrix": [[[0,0],[1,0]], [[1,0],[0,0]]]}],
      "state_prime": {...},          # optional, second pure state
      "factor_dims": [2, 2],         # optional, for bipartite problems
      "options": {"tol_slack": 1e-9} # optional
    }

Grid states use ``{"kind": "grid", "samples": [...], "dx": .., "x0": .., "hbar": ..}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .continuum import GridWavefunction
from .errors import UrlabError
from .qcore import Observable, QuantumState, make_mixed_state, make_observable, make_pure_state

STATE_KINDS = ("pure", "mixed", "grid")


class ProblemFileError(UrlabError):
    """Malformed problem file; ``location`` is a JSON path such as ``observables[1].matrix``."""

    def __init__(self, location, message):
        self.location = location
        super().__init__(f"{location}: {message}")


def _complex(value, where):
    if isinstance(value, bool):
        raise ProblemFileError(where, "expected a number or [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ProblemFileError(where, f"expected a number or [re, im] pair, got {value!r}")


def decode_vector(data, where) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ProblemFileError(where, "expected a non-empty list")
    return np.array([_complex(v, f"{where}[{i}]") for i, v in enumerate(data)], dtype=np.complex128)


def decode_matrix(data, where) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ProblemFileError(where, "expected a non-empty list of rows")
    rows = [decode_vector(r, f"{where}[{i}]") for i, r in enumerate(data)]
    n = len(rows)
    for i, r in enumerate(rows):
        if len(r) != n:
            raise ProblemFileError(f"{where}[{i}]", f"row has {len(r)} entries, matrix needs {n}")
    return np.array(rows)


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=np.complex128).ravel()]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=np.complex128)]


@dataclass
class StateSpec:
    kind: str
    data: np.ndarray                      # vector, density matrix or grid samples
    grid: dict = field(default_factory=dict)  # dx, x0, hbar for grid states

    @property
    def dim(self):
        return self.data.shape[0]

    def build(self, where="state"):
        try:
            if self.kind == "pure":
                return make_pure_state(self.data)
            if self.kind == "mixed":
                return make_mixed_state(self.data)
            return GridWavefunction(self.data, self.grid["dx"], self.grid["x0"],
                                    self.grid.get("hbar", 1.0))
        except (UrlabError, ValueError) as exc:
            raise ProblemFileError(where, str(exc)) from exc

    def to_json(self):
        if self.kind == "pure":
            return {"kind": "pure", "vector": encode_vector(self.data)}
        if self.kind == "mixed":
            return {"kind": "mixed", "rho": encode_matrix(self.data)}
        return {"kind": "grid", "samples": encode_vector(self.data), **self.grid}

    @classmethod
    def from_state(cls, state: QuantumState | GridWavefunction):
        if isinstance(state, GridWavefunction):
            return cls("grid", np.asarray(state.samples),
                       {"dx": float(state.dx), "x0": float(state.x0), "hbar": float(state.hbar)})
        if state.is_pure:
            return cls("pure", np.asarray(state.vector))
        return cls("mixed", np.asarray(state.rho))


def _decode_state(data, where) -> StateSpec:
    if not isinstance(data, dict):
        raise ProblemFileError(where, "expected an object")
    kind = data.get("kind")
    if kind not in STATE_KINDS:
        raise ProblemFileError(f"{where}.kind", f"expected one of {STATE_KINDS}, got {kind!r}")
    if kind == "pure":
        return StateSpec(kind, decode_vector(data.get("vector"), f"{where}.vector"))
    if kind == "mixed":
        return StateSpec(kind, decode_matrix(data.get("rho"), f"{where}.rho"))
    grid = {}
    for key in ("dx", "x0", "hbar"):
        if key not in data:
            if key == "hbar":
                continue
            raise ProblemFileError(f"{where}.{key}", "missing")
        val = data[key]
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ProblemFileError(f"{where}.{key}", f"expected a real number, got {val!r}")
        grid[key] = float(val)
    return StateSpec(kind, decode_vector(data.get("samples"), f"{where}.samples"), grid)


@dataclass
class ProblemFile:
    state: StateSpec
    observables: list  # [(label, matrix)]
    state_prime: StateSpec | None = None
    factor_dims: tuple | None = None
    options: dict = field(default_factory=dict)

    def build_state(self):
        return self.state.build("state")

    def build_state_prime(self):
        return None if self.state_prime is None else self.state_prime.build("state_prime")

    def build_observables(self) -> list[Observable]:
        out = []
        for i, (label, m) in enumerate(self.observables):
            try:
                out.append(make_observable(m, label))
            except UrlabError as exc:
                raise ProblemFileError(f"observables[{i}] ({label!r})", str(exc)) from exc
        return out

    def observable(self, label) -> Observable:
        for X in self.build_observables():
            if X.label == label:
                return X
        known = ", ".join(repr(lab) for lab, _ in self.observables)
        raise ProblemFileError("observables", f"no observable labelled {label!r} (have {known})")

    def to_json(self) -> dict:
        out = {"state": self.state.to_json(),
               "observables": [{"label": lab, "matrix": encode_matrix(m)}
                               for lab, m in self.observables]}
        if self.state_prime is not None:
            out["state_prime"] = self.state_prime.to_json()
        if self.factor_dims is not None:
            out["factor_dims"] = list(self.factor_dims)
        if self.options:
            out["options"] = dict(self.options)
        return out


def parse_problem(data) -> ProblemFile:
    if not isinstance(data, dict):
        raise ProblemFileError("$", "top level must be an object")
    if "state" not in data:
        raise ProblemFileError("state", "missing")
    state = _decode_state(data["state"], "state")
    dims = data.get("factor_dims")
    if dims is not None:
        if (not isinstance(dims, list) or len(dims) != 2
                or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)):
            raise ProblemFileError("factor_dims", f"expected two positive integers, got {dims!r}")
        if dims[0] * dims[1] != state.dim:
            raise ProblemFileError("factor_dims", f"{dims[0]} x {dims[1]} does not match dimension {state.dim}")
        dims = tuple(dims)
    allowed = {state.dim} if dims is None else {state.dim, dims[0]}
    obs_data = data.get("observables", [])
    if not isinstance(obs_data, list):
        raise ProblemFileError("observables", "expected a list")
    observables, seen = [], set()
    for i, item in enumerate(obs_data):
        where = f"observables[{i}]"
        if not isinstance(item, dict) or "matrix" not in item:
            raise ProblemFileError(where, "expected an object with 'label' and 'matrix'")
        label = str(item.get("label", f"O{i}"))
        if label in seen:
            raise ProblemFileError(f"{where}.label", f"duplicate label {label!r}")
        seen.add(label)
        m = decode_matrix(item["matrix"], f"{where}.matrix")
        if state.kind != "grid" and m.shape[0] not in allowed:
            raise ProblemFileError(f"{where}.matrix",
                                   f"{label!r} is {m.shape[0]}x{m.shape[0]}, state has dimension {state.dim}")
        observables.append((label, m))
    prime = None
    if data.get("state_prime") is not None:
        prime = _decode_state(data["state_prime"], "state_prime")
        if prime.kind != "pure" or (state.kind != "grid" and prime.dim != state.dim):
            raise ProblemFileError("state_prime", "must be a pure state of the same dimension")
    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ProblemFileError("options", "expected an object")
    return ProblemFile(state, observables, prime, dims, dict(options))


def loads_problem(text: str) -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    return parse_problem(data)


def load_problem(path) -> ProblemFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProblemFileError(str(path), exc.strerror or str(exc)) from exc
    return loads_problem(text)


def dumps_problem(problem: ProblemFile, indent=None) -> str:
    return json.dumps(problem.to_json(), indent=indent)


def dump_problem(problem: ProblemFile, path, indent=2) -> None:
    Path(path).write_text(dumps_problem(problem, indent) + "\n")


def make_problem(state, observables, state_prime=None, factor_dims=None, options=None) -> ProblemFile:
    return ProblemFile(StateSpec.from_state(state),
                       [(X.label, np.asarray(X.matrix)) for X in observables],
                       None if state_prime is None else StateSpec.from_state(state_prime),
                       None if factor_dims is None else tuple(factor_dims),
                       dict(options or {}))


__all__ = [
    "ProblemFile",
    "ProblemFileError",
    "StateSpec",
    "decode_matrix",
    "decode_vector",
    "dump_problem",
    "dumps_problem",
    "encode_matrix",
    "encode_vector",
    "load_problem",
    "loads_problem",
    "make_problem",
    "parse_problem",
]
