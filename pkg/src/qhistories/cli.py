"""Command-line front end.

Usage examples::

    qhistories vector xz-example
    qhistories --format json chsh bell2-chsh --mode per-pair
    qhistories entropy composite-pair --subsystem A
    qhistories --seed 7 demo precession-lg
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import density, engine, inequalities, observables, protocol
from .errors import EnumerationCapError, NumericalContractError, ValidationError
from .scenario import BUILTINS, Scenario, ScenarioError, load_scenario
from .states import pauli_x

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
SUM_TOL = 1e-10
SAMPLE_SHOTS = 10_000
TABLE_ONLY = {"vector", "probs"}  # CSV for these is one row per outcome tuple


@dataclass
class RunResult:
    """Structured command output.

    ``payload`` holds scalars and nested dicts; ``rows`` (with ``columns``)
    holds the tabular part, if any.
    """

    command: str
    payload: dict[str, Any] = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list[Any]] = field(default_factory=list)
    exit_code: int = EXIT_OK
    sections: list[RunResult] = field(default_factory=list)


def _history_rows(spec: engine.HistorySpec, hv: engine.HistoryVector, keys):
    rows = []
    for alpha in keys:
        a = hv.amplitude(alpha)
        rows.append([*alpha, abs(a) ** 2, a.real, a.imag])
    return [f"slot_{k}" for k in range(1, spec.n + 1)] + ["probability", "amplitude_re", "amplitude_im"], rows


def cmd_vector(scn: Scenario, args) -> RunResult:
    spec = scn.spec
    hv = engine.build_history_vector(spec, cap=args.cap)
    cols, rows = _history_rows(spec, hv, hv.content())
    return RunResult("vector", {"content_size": len(rows)}, cols, rows)


def cmd_probs(scn: Scenario, args) -> RunResult:
    spec = scn.spec
    hv = engine.build_history_vector(spec, cap=args.cap)
    cols, rows = _history_rows(spec, hv, spec.outcomes())
    total = float(sum(r[spec.n] for r in rows))
    res = RunResult("probs", {"total_probability": total}, cols, rows)
    if abs(total - 1.0) > SUM_TOL:
        res.exit_code = EXIT_NUMERICAL
    return res


def cmd_consistency(scn: Scenario, args) -> RunResult:
    r = engine.is_consistent_set(scn.spec, tol=args.tol, cap=args.cap)
    payload = {"consistent": r.consistent, "max_interference": r.max_interference}
    if r.witness is not None:
        payload["witness"] = [list(r.witness[0]), list(r.witness[1])]
    return RunResult("consistency", payload)


def cmd_marginals(scn: Scenario, args) -> RunResult:
    r = engine.marginal_checks(scn.spec, cap=args.cap)
    payload = {
        "total_probability_residual": r.total_probability_residual,
        "amplitude_residuals": r.amplitude_residuals,
        "last_slot_probability_residual": r.last_slot_probability_residual,
        "intermediate_probability_residuals": r.intermediate_probability_residuals,
    }
    res = RunResult("marginals", payload)
    if r.total_probability_residual > SUM_TOL:
        res.exit_code = EXIT_NUMERICAL
    return res


def _parse_slots(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ValidationError(f"--trace-out expects comma-separated slot numbers, got {text!r}") from None


def cmd_entropy(scn: Scenario, args) -> RunResult:
    if scn.composite is not None:
        hv = scn.composite.history_vector(args.cap)
    else:
        hv = engine.build_history_vector(scn.spec, cap=args.cap)
    rho = density.pure_density(hv)
    payload: dict[str, Any] = {}
    if args.subsystem:
        if scn.composite is None:
            raise ScenarioError("--subsystem needs a scenario with a 'composite' block")
        rho = density.space_reduce_density(rho, args.subsystem)
        payload["kept"] = args.subsystem
    if args.trace_out:
        traced = _parse_slots(args.trace_out)
        keep = [k for k in rho.slots if k not in traced]
        rho = density.time_reduce(rho, keep)
        payload["kept_slots"] = keep
    payload["labels"] = list(rho.space.labels)
    payload["entropy_nats"] = density.von_neumann_entropy(rho)
    payload["entropy_bits"] = density.von_neumann_entropy(rho, base=2)
    payload["purity"] = rho.purity()
    return RunResult("entropy", payload)


def cmd_protocol_check(scn: Scenario, args) -> RunResult:
    r = protocol.verify_protocol_equivalence(scn.spec, tol=args.tol, cap=args.cap)
    res = RunResult("protocol-check", {
        "passed": r.passed, "max_residual": r.max_residual,
        "worst_tuple": list(r.worst_tuple), "max_norm_deviation": r.max_norm_deviation,
    })
    if not r.passed:
        res.exit_code = EXIT_NUMERICAL
    return res


def cmd_lg(scn: Scenario, args) -> RunResult:
    sched = scn.schedule()
    rep = inequalities.lg_evaluate(sched)
    dec = inequalities.lg_interference_decomposition(sched)
    payload = rep.as_dict()
    payload["decomposition_residual"] = dec.residual
    return RunResult("lg", payload)


def _chsh(scn: Scenario, mode: str) -> inequalities.CHSHReport:
    c = scn.chsh
    if c is None:
        raise ScenarioError(f"scenario {scn.name!r} has no 'chsh' block")
    u1, u2 = scn.evolutions
    ref = scn.measurements if scn.measurements is not None else None
    return inequalities.chsh_evaluate(
        scn.initial_state, u1, u2, c.a1, c.b1, c.a2, c.b2, mode=mode,
        reference=ref, flip_a1=mode in c.flip_a1)


def cmd_chsh(scn: Scenario, args) -> RunResult:
    mode = args.mode or (scn.chsh.mode if scn.chsh else "fixed-basis")
    rep = _chsh(scn, mode)
    payload = {k: v for k, v in rep.as_dict().items() if k != "tables"}
    if rep.a1_flipped:
        c = scn.chsh
        raw = inequalities.chsh_evaluate(scn.initial_state, *scn.evolutions, c.a1, c.b1, c.a2, c.b2,
                                         mode=mode, reference=scn.measurements)
        payload["unflipped_averages"] = raw.averages
        payload["unflipped_S"] = raw.s
    res = RunResult("chsh", payload)
    if rep.tables:
        res.columns = ["pair", "first", "second", "probability"]
        res.rows = [[pair, x, y, p] for pair, t in rep.tables.items() for (x, y), p in t.items()]
        for pair, t in rep.tables.items():
            if abs(sum(t.values()) - 1.0) > SUM_TOL:
                res.exit_code = EXIT_NUMERICAL
    return res


def cmd_intermediate(scn: Scenario, args) -> RunResult:
    spec = scn.spec
    if spec.n != 2:
        raise ScenarioError("intermediate needs a two-slot scenario")
    b2 = spec.measurements[1]
    st = observables.two_time_intermediate_state(spec, b2, args.beta2)
    payload = {
        "beta2": args.beta2,
        "normalization": st.normalization,
        "state": [[z.real, z.imag] for z in st.state],
        "abl_weights": st.weights.tolist(),
    }
    return RunResult("intermediate", payload)


def cmd_demo(scn: Scenario, args) -> RunResult:
    name = args.name
    sections: list[RunResult] = []
    ns = argparse.Namespace(**vars(args))
    ns.tol = 1e-10
    if name == "xz-example":
        sections.append(cmd_vector(scn, ns))
        x_spec = scn.spec.replace(measurements=[pauli_x(), pauli_x()])
        hv = engine.build_history_vector(x_spec, cap=args.cap)
        cols, rows = _history_rows(x_spec, hv, hv.content())
        sections.append(RunResult("vector (X measured at both times)", {"content_size": len(rows)}, cols, rows))
        sections.append(cmd_consistency(scn, ns))
        sections.append(cmd_protocol_check(scn, ns))
        if args.seed is not None:
            sections.append(_sampling_section(engine.build_history_vector(scn.spec), args.seed))
    elif name == "bell2-chsh":
        for mode in inequalities.MODES:
            ns.mode = mode
            sections.append(cmd_chsh(scn, ns))
        ns.trace_out, ns.subsystem = "2", None
        sections.append(cmd_entropy(scn, ns))
        if args.seed is not None:
            sections.append(_sampling_section(engine.build_history_vector(scn.spec), args.seed))
    elif name == "precession-lg":
        sections.append(cmd_lg(scn, ns))
        sections.append(cmd_marginals(scn, ns))
        if args.seed is not None:
            sections.append(_sampling_section(engine.build_history_vector(scn.spec), args.seed))
    else:
        raise ScenarioError(f"unknown demo {name!r}; choose from xz-example, bell2-chsh, precession-lg")
    code = max(s.exit_code for s in sections)
    return RunResult(f"demo {name}", {}, exit_code=code, sections=sections)


def _sampling_section(hv: engine.HistoryVector, seed: int) -> RunResult:
    counts = observables.sample_histories(hv, SAMPLE_SHOTS, seed)
    rows = [[*k, c, c / SAMPLE_SHOTS, hv.probability(k)] for k, c in counts.items()]
    cols = [f"slot_{k}" for k in range(1, hv.n + 1)] + ["count", "frequency", "probability"]
    return RunResult("sampled histories", {"shots": SAMPLE_SHOTS, "seed": seed}, cols, rows)


COMMANDS: dict[str, Callable[[Scenario, argparse.Namespace], RunResult]] = {
    "vector": cmd_vector,
    "probs": cmd_probs,
    "consistency": cmd_consistency,
    "marginals": cmd_marginals,
    "entropy": cmd_entropy,
    "protocol-check": cmd_protocol_check,
    "lg": cmd_lg,
    "chsh": cmd_chsh,
    "intermediate": cmd_intermediate,
    "demo": cmd_demo,
}


def run_command(scn: Scenario, command: str, args: argparse.Namespace) -> RunResult:
    try:
        fn = COMMANDS[command]
    except KeyError:
        raise ValidationError(f"unknown command {command!r}") from None
    return fn(scn, args)


# --- rendering -------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        s = f"{float(x):.7f}"
        return "0.0000000" if s == "-0.0000000" else s
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _to_json(res: RunResult) -> dict:
    out: dict[str, Any] = {"command": res.command}
    out.update(_plain(res.payload))
    if res.columns:
        out["columns"] = res.columns
        out["rows"] = _plain(res.rows)
    if res.sections:
        out["sections"] = [_to_json(s) for s in res.sections]
    out["exit_code"] = res.exit_code
    return out


def _table(res: RunResult, out: list[str]):
    out.append(f"== {res.command} ==")
    for key, value in res.payload.items():
        if isinstance(value, dict):
            out.append(f"{key}:")
            for k, v in value.items():
                out.append(f"  {k}: {_fmt(v)}")
        else:
            out.append(f"{key}: {_fmt(value)}")
    if res.columns:
        cells = [res.columns] + [[_fmt(v) for v in row] for row in res.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(res.columns))]
        for r in cells:
            out.append("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())
    for s in res.sections:
        out.append("")
        _table(s, out)


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    else:
        rows.append([prefix, json.dumps(_plain(value)) if isinstance(value, (list, tuple)) else _plain(value)])


def render(res: RunResult, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_to_json(res), indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for i, part in enumerate([res] + res.sections):
            if i:
                buf.write("\n")
            rows: list = []
            if part.command not in TABLE_ONLY:
                _flatten("", part.payload, rows)
            if rows:
                w.writerow(["key", "value"])
                w.writerows(rows)
            if part.columns:
                if rows:
                    buf.write("\n")
                w.writerow(part.columns)
                w.writerows(_plain(part.rows))
        return buf.getvalue().strip("\n")
    lines: list[str] = []
    _table(res, lines)
    return "\n".join(lines)


# --- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "json", "csv"], default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for the sampling sections of demos")
    common.add_argument("--cap", type=int, default=argparse.SUPPRESS,
                        help="maximum number of enumerated outcome sequences")

    p = argparse.ArgumentParser(prog="qhistories", parents=[common],
                                description="Quantum history vectors from JSON scenarios.")
    sub = p.add_subparsers(dest="command", required=True)
    scenario_help = f"scenario JSON path or built-in name ({', '.join(BUILTINS)})"

    def add(name, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.add_argument("scenario", help=scenario_help)
        return sp

    add("vector", "history content with amplitudes")
    add("probs", "probabilities of every outcome sequence")
    add("consistency", "decoherence-condition check").add_argument("--tol", type=float, default=1e-10)
    add("marginals", "sum-rule residuals")
    sp = add("entropy", "von Neumann entropy of a reduced history density matrix")
    g = sp.add_argument_group("reduction")
    g.add_argument("--trace-out", dest="trace_out", metavar="SLOTS",
                   help="comma-separated slots to trace out, e.g. 2 or 1,3")
    g.add_argument("--subsystem", choices=["A", "B"], help="keep one party of a composite scenario")
    add("protocol-check", "compare the compositeness protocol with the history vector") \
        .add_argument("--tol", type=float, default=1e-10)
    add("lg", "Leggett-Garg evaluation")
    add("chsh", "temporal CHSH evaluation").add_argument(
        "--mode", choices=list(inequalities.MODES), default=None)
    add("intermediate", "two-time intermediate state").add_argument(
        "--beta2", type=int, required=True, metavar="IDX")
    sp = sub.add_parser("demo", parents=[common], help="run a built-in demonstration")
    sp.add_argument("name", choices=["xz-example", "bell2-chsh", "precession-lg"])
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, default in (("format", "table"), ("seed", None), ("cap", engine.DEFAULT_CAP)):
        if not hasattr(args, key):
            setattr(args, key, default)
    try:
        if args.command == "entropy" and not (args.trace_out or args.subsystem):
            raise ValidationError("entropy needs --trace-out SLOTS or --subsystem A|B")
        scn = load_scenario(args.name if args.command == "demo" else args.scenario)
        res = run_command(scn, args.command, args)
    except NumericalContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, EnumerationCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(render(res, args.format))
    if res.exit_code == EXIT_NUMERICAL:
        print("error: numerical contract violated", file=sys.stderr)
    return res.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
