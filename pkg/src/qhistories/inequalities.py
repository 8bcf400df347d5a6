"""Leggett-Garg and temporal CHSH evaluations."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .engine import (
    HistorySpec,
    ObservableSpec,
    build_history_vector,
    chain_operator,
    reduce_schedule,
    sequence_probability,
)
from .errors import ValidationError
from .observables import HistoryOperator, history_expectation, multitime_average
from .states import pauli_z
from .tensor import as_operator, as_state, random_state, random_unitary

BOUND_TOL = 1e-9


def _require_dichotomic(obs: ObservableSpec, what: str):
    if obs.count != 2 or sorted(obs.eigenvalues.tolist()) != [-1.0, 1.0]:
        raise ValidationError(f"{what} ({obs.name!r}) must have eigenvalues exactly +1 and -1")


@dataclass(frozen=True)
class DichotomicSchedule:
    """Three-time schedule measuring the same ``+-1`` observable ``q`` each time.

    ``u01`` evolves ``t_0 -> t_1``, ``u12`` ``t_1 -> t_2``, ``u23`` ``t_2 -> t_3``.
    """

    initial_state: np.ndarray
    u01: np.ndarray
    u12: np.ndarray
    u23: np.ndarray
    q: ObservableSpec

    def __post_init__(self):
        _require_dichotomic(self.q, "Q")
        object.__setattr__(self, "initial_state", as_state(self.initial_state))
        for name in ("u01", "u12", "u23"):
            object.__setattr__(self, name, as_operator(getattr(self, name)))
        self.spec()

    def spec(self) -> HistorySpec:
        return self._spec

    @cached_property
    def _spec(self) -> HistorySpec:
        return HistorySpec(self.initial_state, [self.u01, self.u12, self.u23], [self.q] * 3)

    def index(self, value: int) -> int:
        return self.q.index_of(value)


def ry(theta: float) -> np.ndarray:
    """``exp(-i theta Y / 2)``: rotates Bloch vectors by ``theta`` in the XZ plane."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def precession_schedule(theta: float, initial_state=(1.0, 0.0)) -> DichotomicSchedule:
    """Z measured at three times with a rotation by ``theta`` between slots."""
    r = ry(theta)
    return DichotomicSchedule(np.asarray(initial_state, dtype=complex), np.eye(2), r, r, pauli_z())


def _correlator_from_spec(spec: HistorySpec) -> float:
    a, b = spec.measurements
    return float(sum(
        a.eigenvalues[i] * b.eigenvalues[j] * sequence_probability(spec, (i, j))
        for i in range(a.count) for j in range(b.count)
    ))


def two_time_correlator(sched: DichotomicSchedule, i: int, j: int) -> float:
    """``C_ij`` with only times ``t_i`` and ``t_j`` measured."""
    if not (1 <= i < j <= 3):
        raise ValidationError(f"need 1 <= i < j <= 3, got i={i}, j={j}")
    return _correlator_from_spec(reduce_schedule(sched.spec(), [i, j]))


def interference_term(sched: DichotomicSchedule, q: Sequence) -> float:
    """``I`` for a triple with one ``None`` (the summed slot), e.g. ``(None, 1, -1)``.

    ``I = 2 Re Tr[C_{.., +1, ..} C^dagger_{.., -1, ..}]`` with the open slot
    set to ``+1`` and ``-1`` respectively.
    """
    q = list(q)
    if len(q) != 3 or q.count(None) != 1:
        raise ValidationError("exactly one slot must be summed (None)")
    spec = sched.spec()
    k = q.index(None)
    plus = [sched.index(v) if v is not None else sched.index(1) for v in q]
    minus = list(plus)
    minus[k] = sched.index(-1)
    cp = chain_operator(spec, plus)
    cm = chain_operator(spec, minus)
    return float(2 * np.real(np.sum(cp * cm.conj())))


def _three_time_p(sched: DichotomicSchedule, q1: int, q2: int, q3: int) -> float:
    return sequence_probability(sched.spec(), (sched.index(q1), sched.index(q2), sched.index(q3)))


@dataclass
class LGReport:
    c12: float
    c13: float
    c23: float
    k: float
    interference: dict[tuple, float] = field(default_factory=dict)
    consistent: bool = True
    violated: bool = False

    def as_dict(self) -> dict:
        return {
            "C12": self.c12, "C13": self.c13, "C23": self.c23, "K": self.k,
            "interference": {_fmt_triple(t): v for t, v in self.interference.items()},
            "consistent": self.consistent, "violated": self.violated,
        }


def _fmt_triple(t) -> str:
    return "(" + ",".join("*" if v is None else f"{v:+d}" for v in t) + ")"


LG_TRIPLES = [(None, a, b) for a in (1, -1) for b in (1, -1)] + [
    (a, None, b) for a in (1, -1) for b in (1, -1)]


def lg_evaluate(sched: DichotomicSchedule, tol: float = 1e-10) -> LGReport:
    """``K = C12 + C23 - C13`` plus the interference terms of the three-time set.

    Macrorealism bounds ``K`` to ``[-3, 1]``: classically it equals
    ``1 - 4 [p(+,-,+) + p(-,+,-)]``.

    ``consistent`` means every interference term is within ``tol`` of zero;
    ``violated`` means ``K`` leaves ``[-3, 1]`` by more than ``tol``.
    """
    c12 = two_time_correlator(sched, 1, 2)
    c13 = two_time_correlator(sched, 1, 3)
    c23 = two_time_correlator(sched, 2, 3)
    k = c12 + c23 - c13
    interf = {t: interference_term(sched, t) for t in LG_TRIPLES}
    return LGReport(
        c12, c13, c23, k, interf,
        consistent=all(abs(v) <= tol for v in interf.values()),
        violated=bool(k > 1 + tol or k < -3 - tol),
    )


@dataclass(frozen=True)
class LGDecomposition:
    k_direct: float
    k_decomposed: float
    residual: float
    max_trailing_interference: float


def lg_interference_decomposition(sched: DichotomicSchedule) -> LGDecomposition:
    """Compare ``K`` from two-time correlators with its three-time expansion

    ``K = 1 - sum_q [4 p(q,-q,q) - I(*,q,q) + I(*,q,-q) + I(q,*,q) - I(q,*,-q)]``

    and report ``max |I(q1,q2,*)|``, which vanishes identically.
    """
    direct = (two_time_correlator(sched, 1, 2) + two_time_correlator(sched, 2, 3)
              - two_time_correlator(sched, 1, 3))
    total = 0.0
    for q in (1, -1):
        total += (
            4 * _three_time_p(sched, q, -q, q)
            - interference_term(sched, (None, q, q))
            + interference_term(sched, (None, q, -q))
            + interference_term(sched, (q, None, q))
            - interference_term(sched, (q, None, -q))
        )
    decomposed = 1.0 - total
    trailing = max(abs(interference_term(sched, (a, b, None))) for a in (1, -1) for b in (1, -1))
    return LGDecomposition(direct, decomposed, abs(direct - decomposed), trailing)


@dataclass
class CHSHReport:
    """Temporal CHSH averages keyed ``"A1A2"``, ``"A1B2"``, ``"B1A2"``, ``"B1B2"``."""

    mode: str
    averages: dict[str, float]
    s: float
    tables: dict[str, dict[tuple[float, float], float]] = field(default_factory=dict)
    a1_flipped: bool = False
    tol: float = BOUND_TOL

    @property
    def violated(self) -> bool:
        return abs(self.s) > 2 + self.tol

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "a1_flipped": self.a1_flipped,
            "averages": dict(self.averages),
            "S": self.s,
            "violated": self.violated,
            "tables": {
                pair: {f"({x:+g},{y:+g})": p for (x, y), p in table.items()}
                for pair, table in self.tables.items()
            },
        }


PAIRS = ("A1A2", "A1B2", "B1A2", "B1B2")
MODES = ("fixed-basis", "per-pair")


def chsh_evaluate(initial_state, u1, u2, a1: ObservableSpec, b1: ObservableSpec,
                  a2: ObservableSpec, b2: ObservableSpec, mode: str = "fixed-basis",
                  reference: Sequence[ObservableSpec] | None = None,
                  flip_a1: bool = False, tol: float = BOUND_TOL) -> CHSHReport:
    """Evaluate ``S = E(A1,A2) + E(A1,B2) + E(B1,A2) - E(B1,B2)``.

    ``fixed-basis`` expands one history vector in the ``reference``
    observables (Z at both times by default) and takes expectation values of
    ``X (.) Y`` on it. ``per-pair`` builds a separate two-time history for
    each observable pair and averages outcome products over its
    probabilities. ``flip_a1`` replaces A1 by -A1 before evaluating.
    """
    for name, obs in (("A1", a1), ("B1", b1), ("A2", a2), ("B2", b2)):
        _require_dichotomic(obs, name)
    if flip_a1:
        a1 = a1.negated()
    first = {"A1": a1, "B1": b1}
    second = {"A2": a2, "B2": b2}
    averages: dict[str, float] = {}
    tables: dict[str, dict] = {}
    if mode == "fixed-basis":
        if reference is None:
            reference = [pauli_z(), pauli_z()] if a1.dim == 2 else None
        if reference is None or len(reference) != 2:
            raise ValidationError("fixed-basis mode needs two reference observables")
        hv = build_history_vector(HistorySpec(initial_state, [u1, u2], list(reference)))
        for pair in PAIRS:
            x, y = first[pair[:2]], second[pair[2:]]
            averages[pair] = history_expectation(
                hv, HistoryOperator.product({1: x.operator(), 2: y.operator()}))
    elif mode == "per-pair":
        for pair in PAIRS:
            x, y = first[pair[:2]], second[pair[2:]]
            hv = build_history_vector(HistorySpec(initial_state, [u1, u2], [x, y]))
            averages[pair] = multitime_average(hv, [1, 2])
            tables[pair] = {
                (float(x.eigenvalues[i]), float(y.eigenvalues[j])): hv.probability((i, j))
                for i in range(2) for j in range(2)
            }
            total = sum(tables[pair].values())
            if abs(total - 1.0) > 1e-10:
                raise ValidationError(f"{pair} table sums to {total!r}")
    else:
        raise ValidationError(f"unknown CHSH mode {mode!r}; choose one of {MODES}")
    s = averages["A1A2"] + averages["A1B2"] + averages["B1A2"] - averages["B1B2"]
    return CHSHReport(mode, averages, float(s), tables, a1_flipped=flip_a1, tol=tol)


def random_schedule(rng: np.random.Generator) -> DichotomicSchedule:
    """Haar-random state and unitaries, Z measured, for property sweeps."""
    return DichotomicSchedule(random_state(2, rng), random_unitary(2, rng),
                              random_unitary(2, rng), random_unitary(2, rng), pauli_z())


def _monomial(rng: np.random.Generator) -> np.ndarray:
    phases = np.exp(2j * np.pi * rng.random(2))
    return np.eye(2)[:, rng.permutation(2)] * phases


def consistent_schedule(rng: np.random.Generator) -> DichotomicSchedule:
    """A random schedule whose three-time histories are consistent.

    After ``t_1`` the evolutions map Z eigenstates to Z eigenstates (up to
    phase and an optional swap), so no two histories interfere.
    """
    return DichotomicSchedule(random_state(2, rng), random_unitary(2, rng),
                              _monomial(rng), _monomial(rng), pauli_z())


def partly_consistent_schedule(rng: np.random.Generator) -> DichotomicSchedule:
    """Only the ``t_1 -> t_2`` step is diagonal-like; the last step is random."""
    return DichotomicSchedule(random_state(2, rng), random_unitary(2, rng),
                              _monomial(rng), random_unitary(2, rng), pauli_z())
