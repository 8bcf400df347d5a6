"""JSON scenario files.

Complex numbers are ``[re, im]`` pairs (a bare real is also accepted on
input). Matrices are row-major lists of rows. Every matrix and basis is
validated on load, and errors name the offending entry.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .density import CompositeHistorySpec
from .engine import HistorySpec, ObservableSpec
from .errors import ValidationError
from .inequalities import MODES, DichotomicSchedule, ry
from .states import pauli_z
from .tensor import ARITH_TOL, STRUCT_TOL, check_unitary

BUILTINS = ("xz-example", "bell2-chsh", "precession-lg", "composite-pair")


class ScenarioError(ValidationError):
    pass


@dataclass
class ChshSetup:
    a1: ObservableSpec
    b1: ObservableSpec
    a2: ObservableSpec
    b2: ObservableSpec
    mode: str = "fixed-basis"
    flip_a1: tuple[str, ...] = ()


@dataclass
class LGSetup:
    q: ObservableSpec
    theta: float | None = None
    unitaries: tuple[np.ndarray, ...] | None = None


@dataclass
class Scenario:
    dimension: int
    initial_state: np.ndarray
    evolutions: list[np.ndarray]
    measurements: list[ObservableSpec] | None
    composite: CompositeHistorySpec | None = None
    lg: LGSetup | None = None
    chsh: ChshSetup | None = None
    name: str = ""

    @property
    def spec(self) -> HistorySpec:
        if self.composite is not None:
            return self.composite.joint
        return HistorySpec(self.initial_state, self.evolutions, self.measurements)

    def schedule(self) -> DichotomicSchedule:
        if self.lg is None:
            raise ScenarioError(f"scenario {self.name!r} has no 'lg' block")
        if self.lg.unitaries is not None:
            u01, u12, u23 = self.lg.unitaries
        else:
            r = ry(self.lg.theta)
            u01, u12, u23 = np.eye(2), r, r
        return DichotomicSchedule(self.initial_state, u01, u12, u23, self.lg.q)


def _complex(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ScenarioError(f"{where}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise ScenarioError(f"{where}: expected a number or [re, im], got {x!r}")


def _vector(x, where: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(x, list) or not x:
        raise ScenarioError(f"{where}: expected a non-empty array of complex numbers")
    v = np.array([_complex(e, f"{where}[{k}]") for k, e in enumerate(x)], dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ScenarioError(f"{where}: non-finite entry")
    if dim is not None and v.size != dim:
        raise ScenarioError(f"{where}: length {v.size}, expected {dim}")
    return v


def _matrix(x, where: str, dim: int) -> np.ndarray:
    if not isinstance(x, list) or len(x) != dim:
        raise ScenarioError(f"{where}: expected {dim} rows")
    return np.array([_vector(row, f"{where}[{k}]", dim) for k, row in enumerate(x)])


def _unitary(x, where: str, dim: int) -> np.ndarray:
    u = _matrix(x, where, dim)
    if not check_unitary(u, STRUCT_TOL):
        err = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
        raise ScenarioError(f"{where}: matrix is not unitary (max |U^dagger U - I| = {err:.3g})")
    return u


def _observable(x, where: str, dim: int) -> ObservableSpec:
    if not isinstance(x, dict):
        raise ScenarioError(f"{where}: expected an object with name, eigenvalues, eigenvectors")
    for key in ("eigenvalues", "eigenvectors"):
        if key not in x:
            raise ScenarioError(f"{where}: missing field {key!r}")
    name = str(x.get("name", where))
    vals = x["eigenvalues"]
    if not isinstance(vals, list) or len(vals) != dim or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
        raise ScenarioError(f"{where}.eigenvalues: expected {dim} real numbers")
    vecs = x["eigenvectors"]
    if not isinstance(vecs, list) or len(vecs) != dim:
        raise ScenarioError(f"{where}.eigenvectors: expected {dim} vectors")
    vecs = [_vector(v, f"{where}.eigenvectors[{k}]", dim) for k, v in enumerate(vecs)]
    try:
        return ObservableSpec(name, [float(v) for v in vals], vecs)
    except ValidationError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _observables(x, where: str, dim: int) -> list[ObservableSpec]:
    if not isinstance(x, list):
        raise ScenarioError(f"{where}: expected an array of observables")
    return [_observable(o, f"{where}[{k}]", dim) for k, o in enumerate(x)]


def parse_scenario(data: dict[str, Any], name: str = "") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in ("dimension", "initial_state", "evolutions"):
        if key not in data:
            raise ScenarioError(f"missing top-level field {key!r}")
    dim = data["dimension"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ScenarioError(f"dimension: expected a positive integer, got {dim!r}")
    psi = _vector(data["initial_state"], "initial_state", dim)
    if abs(np.linalg.norm(psi) - 1.0) > ARITH_TOL:
        raise ScenarioError(f"initial_state: norm is {np.linalg.norm(psi)!r}, expected 1")
    if not isinstance(data["evolutions"], list) or not data["evolutions"]:
        raise ScenarioError("evolutions: expected a non-empty array of matrices")
    evolutions = [_unitary(u, f"evolutions[{k}]", dim) for k, u in enumerate(data["evolutions"])]

    composite = None
    measurements = None
    if "composite" in data:
        c = data["composite"]
        if not isinstance(c, dict):
            raise ScenarioError("composite: expected an object")
        da, db = c.get("dim_a"), c.get("dim_b")
        if not isinstance(da, int) or not isinstance(db, int) or da * db != dim:
            raise ScenarioError(f"composite: dim_a * dim_b must equal dimension {dim}")
        ma = _observables(c.get("measurements_a"), "composite.measurements_a", da)
        mb = _observables(c.get("measurements_b"), "composite.measurements_b", db)
        if not (len(ma) == len(mb) == len(evolutions)):
            raise ScenarioError(
                f"composite: {len(evolutions)} evolutions but {len(ma)} A- and "
                f"{len(mb)} B-measurements")
        composite = CompositeHistorySpec(da, db, psi, evolutions, ma, mb)
    if "measurements" in data:
        measurements = _observables(data["measurements"], "measurements", dim)
        if len(measurements) != len(evolutions):
            raise ScenarioError(
                f"length mismatch: {len(evolutions)} evolutions but {len(measurements)} measurements")
    elif composite is None:
        raise ScenarioError("missing top-level field 'measurements'")

    lg = None
    if "lg" in data:
        b = data["lg"]
        if not isinstance(b, dict):
            raise ScenarioError("lg: expected an object")
        q = _observable(b["q_observable"], "lg.q_observable", dim) if "q_observable" in b else pauli_z()
        if "theta" in b:
            theta = b["theta"]
            if not isinstance(theta, (int, float)) or isinstance(theta, bool):
                raise ScenarioError("lg.theta: expected a real number")
            lg = LGSetup(q, theta=float(theta))
        elif "unitaries" in b:
            us = b["unitaries"]
            if not isinstance(us, list) or len(us) != 3:
                raise ScenarioError("lg.unitaries: expected three matrices")
            lg = LGSetup(q, unitaries=tuple(_unitary(u, f"lg.unitaries[{k}]", dim) for k, u in enumerate(us)))
        else:
            raise ScenarioError("lg: need 'theta' or 'unitaries'")
        if q.count != 2 or sorted(q.eigenvalues.tolist()) != [-1.0, 1.0]:
            raise ScenarioError("lg.q_observable: eigenvalues must be exactly +1 and -1")

    chsh = None
    if "chsh" in data:
        b = data["chsh"]
        if not isinstance(b, dict):
            raise ScenarioError("chsh: expected an object")
        obs = {}
        for key in ("a1", "b1", "a2", "b2"):
            if key not in b:
                raise ScenarioError(f"chsh: missing observable {key!r}")
            obs[key] = _observable(b[key], f"chsh.{key}", dim)
            if sorted(obs[key].eigenvalues.tolist()) != [-1.0, 1.0]:
                raise ScenarioError(f"chsh.{key}: eigenvalues must be exactly +1 and -1")
        mode = b.get("mode", "fixed-basis")
        if mode not in MODES:
            raise ScenarioError(f"chsh.mode: expected one of {MODES}, got {mode!r}")
        flip = b.get("flip_a1", [])
        if not isinstance(flip, list) or any(m not in MODES for m in flip):
            raise ScenarioError(f"chsh.flip_a1: expected a list of modes from {MODES}")
        if len(evolutions) != 2:
            raise ScenarioError("chsh: needs exactly two evolutions")
        chsh = ChshSetup(mode=mode, flip_a1=tuple(flip), **obs)

    scn = Scenario(dim, psi, evolutions, measurements, composite, lg, chsh, name)
    try:
        scn.spec
    except ValidationError as exc:
        raise ScenarioError(str(exc)) from None
    return scn


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a path, or a built-in by name (e.g. ``xz-example``)."""
    path = str(path)
    if path in BUILTINS:
        text = resources.files("qhistories.scenarios").joinpath(f"{path}.json").read_text("utf-8")
        name = path
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {path!r}: {exc.strerror}") from None
        name = Path(path).stem
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data, name)


def _c(z) -> list[float]:
    return [float(z.real), float(z.imag)]


def _dump_vector(v) -> list:
    return [_c(z) for z in np.asarray(v)]


def _dump_matrix(m) -> list:
    return [_dump_vector(row) for row in np.asarray(m)]


def _dump_observable(o: ObservableSpec) -> dict:
    return {
        "name": o.name,
        "eigenvalues": [float(v) for v in o.eigenvalues],
        "eigenvectors": [_dump_vector(o.basis[:, k]) for k in range(o.count)],
    }


def dump_scenario(scn: Scenario) -> dict:
    out: dict[str, Any] = {
        "dimension": scn.dimension,
        "initial_state": _dump_vector(scn.initial_state),
        "evolutions": [_dump_matrix(u) for u in scn.evolutions],
    }
    if scn.measurements is not None:
        out["measurements"] = [_dump_observable(o) for o in scn.measurements]
    if scn.composite is not None:
        c = scn.composite
        out["composite"] = {
            "dim_a": c.dim_a, "dim_b": c.dim_b,
            "measurements_a": [_dump_observable(o) for o in c.measurements_a],
            "measurements_b": [_dump_observable(o) for o in c.measurements_b],
        }
    if scn.lg is not None:
        block: dict[str, Any] = {"q_observable": _dump_observable(scn.lg.q)}
        if scn.lg.theta is not None:
            block["theta"] = scn.lg.theta
        else:
            block["unitaries"] = [_dump_matrix(u) for u in scn.lg.unitaries]
        out["lg"] = block
    if scn.chsh is not None:
        c = scn.chsh
        out["chsh"] = {
            "a1": _dump_observable(c.a1), "b1": _dump_observable(c.b1),
            "a2": _dump_observable(c.a2), "b2": _dump_observable(c.b2),
            "mode": c.mode, "flip_a1": list(c.flip_a1),
        }
    return out


def _is_vector(x) -> bool:
    return isinstance(x, list) and all(
        isinstance(e, (int, float)) or (isinstance(e, list) and all(isinstance(v, (int, float)) for v in e))
        for e in x)


def format_scenario(data, indent: int = 0) -> str:
    """JSON text with one line per vector or matrix row."""
    pad = " " * indent
    if isinstance(data, dict):
        items = [f'{pad}  {json.dumps(k)}: {format_scenario(v, indent + 2).lstrip()}' for k, v in data.items()]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(data, list) and not _is_vector(data):
        items = [format_scenario(v, indent + 2) for v in data]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return pad + json.dumps(data)


def save_scenario(scn: Scenario, path: str | Path):
    Path(path).write_text(format_scenario(dump_scenario(scn)) + "\n", encoding="utf-8")
