"""Map an evolving single system onto a static composite one.

Each measured slot contributes one tensor factor: the running state is
cloned in the slot's eigenbasis onto a freshly adjoined twin, and the twin
is then evolved to the next time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import DEFAULT_CAP, HistorySpec, ObservableSpec, build_history_vector
from .errors import EnumerationCapError
from .tensor import ARITH_TOL, STRUCT_TOL, check_unitary, tensor_product


@dataclass(frozen=True)
class CloneGate:
    """Unitary on ``d x d`` copying the basis kets ``|a^i>`` onto a twin
    prepared in ``|a^0>``.

    ``permutation[i * d + j]`` is the flat index of ``V(|a^i> x |a^j>)``.
    """

    d: int
    matrix: np.ndarray
    permutation: tuple[int, ...]


def clone_permutation(d: int) -> list[int]:
    perm = []
    for i in range(d):
        for j in range(d):
            if j == 0:
                target = (i, i)
            elif j == i:
                target = (i, 0)
            else:
                target = (i, j)
            perm.append(target[0] * d + target[1])
    return perm


def clone_gate(basis: ObservableSpec | np.ndarray) -> CloneGate:
    """Build V in the given eigenbasis and return it in the computational basis.

    The special ket is the first basis vector. V fixes ``(i, j)`` for
    ``j != 0, j != i`` and swaps ``(i, 0) <-> (i, i)`` otherwise.
    """
    b = basis.basis if isinstance(basis, ObservableSpec) else np.asarray(basis, dtype=complex)
    d = b.shape[0]
    perm = clone_permutation(d)
    p = np.zeros((d * d, d * d))
    p[perm, np.arange(d * d)] = 1.0
    bb = np.kron(b, b)
    return CloneGate(d, bb @ p @ bb.conj().T, tuple(perm))


@dataclass
class ProtocolTrace:
    labels: list[str] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)

    def record(self, label: str, state: np.ndarray):
        self.labels.append(label)
        self.states.append(state.copy())

    def norms(self) -> list[float]:
        return [float(np.linalg.norm(s)) for s in self.states]


def run_protocol(spec: HistorySpec, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, ProtocolTrace]:
    """Simulate the evolve / adjoin / clone / evolve cycle.

    Returns the final state on ``d**n`` (slot 1 outermost) and the
    per-step snapshots.
    """
    spec.require_rank_one("run_protocol")
    d, n = spec.dim, spec.n
    if d**n > cap:
        raise EnumerationCapError(f"composite dimension {d**n} exceeds cap {cap}")
    trace = ProtocolTrace()
    state = spec.evolutions[0] @ spec.initial_state
    trace.record("evolve t0->t1", state)
    for k in range(1, n):
        basis = spec.measurements[k - 1]
        state = tensor_product(state, basis.vector(0))
        trace.record(f"adjoin twin for t{k}", state)
        gate = clone_gate(basis).matrix
        state = tensor_product(np.eye(d ** (k - 1)), gate) @ state
        trace.record(f"clone t{k}", state)
        state = tensor_product(np.eye(d**k), spec.evolutions[k]) @ state
        trace.record(f"evolve t{k}->t{k + 1}", state)
    return state, trace


@dataclass(frozen=True)
class EquivalenceReport:
    passed: bool
    max_residual: float
    worst_tuple: tuple[int, ...]
    max_norm_deviation: float


def protocol_amplitudes(spec: HistorySpec, final: np.ndarray) -> np.ndarray:
    """Coefficients of ``final`` on the product eigenbasis, as an outcome tensor."""
    t = final.reshape((spec.dim,) * spec.n)
    for k, m in enumerate(spec.measurements):
        t = np.moveaxis(np.tensordot(m.basis.conj().T, t, axes=([1], [k])), 0, k)
    return t


def verify_protocol_equivalence(spec: HistorySpec, tol: float = STRUCT_TOL,
                                cap: int = DEFAULT_CAP) -> EquivalenceReport:
    final, trace = run_protocol(spec, cap)
    got = protocol_amplitudes(spec, final)
    hv = build_history_vector(spec, cap=cap)
    worst, worst_key = -1.0, None
    for alpha in spec.outcomes():
        r = abs(got[alpha] - hv.amplitude(alpha))
        if r > worst:
            worst, worst_key = r, alpha
    norm_dev = max(abs(x - 1.0) for x in trace.norms())
    return EquivalenceReport(bool(worst <= tol and norm_dev <= max(tol, ARITH_TOL)),
                             float(worst), worst_key, float(norm_dev))


def is_unitary_clone(d: int, tol: float = ARITH_TOL) -> bool:
    return check_unitary(clone_gate(np.eye(d)).matrix, tol)
