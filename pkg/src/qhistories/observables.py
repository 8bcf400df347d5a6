"""Observables on history space: multitime projectors, averages, local
non-basis probabilities and the two-time intermediate state."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .engine import (
    HistorySpec,
    HistoryVector,
    ObservableSpec,
    amplitude,
    build_history_vector,
    sequence_probability,
)
from .errors import PostselectionError, ValidationError
from .tensor import STRUCT_TOL, as_operator, as_state, check_hermitian, projector, tensor_all


def _slot_dims(hv: HistoryVector) -> list[int]:
    return [b.shape[0] for b in hv.bases]


def _check_slot(slot: int, n: int):
    if not 1 <= slot <= n:
        raise ValidationError(f"slot {slot} out of range 1..{n}")


class MultitimeProjector:
    """Rank-1 projectors ``|g><g|`` placed at some slots, identity elsewhere.

    ``placements`` maps 1-based slot numbers to the (normalized) ket ``g``.
    """

    def __init__(self, placements: Mapping[int, np.ndarray]):
        if not placements:
            raise ValidationError("a multitime projector needs at least one placement")
        self.placements = {int(k): as_state(v, normalized=True) for k, v in sorted(placements.items())}

    @classmethod
    def for_outcomes(cls, hv: HistoryVector, outcomes: Mapping[int, int]) -> MultitimeProjector:
        """Projector onto the measured eigenvectors ``{slot: outcome index}``."""
        return cls({k: hv.bases[k - 1][:, a] for k, a in outcomes.items()})

    def dense(self, slot_dims: Sequence[int]) -> np.ndarray:
        factors = []
        for k, d in enumerate(slot_dims, start=1):
            g = self.placements.get(k)
            if g is None:
                factors.append(np.eye(d, dtype=complex))
            else:
                if g.size != d:
                    raise ValidationError(f"placement at slot {k} has dim {g.size}, slot has {d}")
                factors.append(projector(g))
        return tensor_all(factors)


def multitime_probability(hv: HistoryVector, proj: MultitimeProjector) -> float:
    """Born value ``<Psi| P |Psi>`` on the dense embedding."""
    dims = _slot_dims(hv)
    t = hv.dense().reshape(dims)
    for k in sorted(proj.placements, reverse=True):
        _check_slot(k, hv.n)
        g = proj.placements[k]
        if g.size != dims[k - 1]:
            raise ValidationError(f"placement at slot {k} has dim {g.size}, slot has {dims[k - 1]}")
        t = np.tensordot(g.conj(), t, axes=([0], [k - 1]))
    return float(np.vdot(t, t).real)


def multitime_average(hv: HistoryVector, slots: Sequence[int]) -> float:
    """``sum_a p(a) * prod_k lambda(a_{i_k})`` using the measured eigenvalues."""
    if hv.eigenvalues is None:
        raise ValidationError("history vector carries no eigenvalue labels")
    slots = [int(s) for s in slots]
    for s in slots:
        _check_slot(s, hv.n)
    total = 0.0
    for alpha, p in hv.probabilities().items():
        total += p * np.prod([hv.eigenvalues[s - 1][alpha[s - 1]] for s in slots])
    return float(total)


class HistoryOperator:
    """Weighted sum of products of single-slot operators.

    Each term is ``(weight, {slot: operator})``; absent slots carry the
    identity.
    """

    def __init__(self, terms: Sequence[tuple[complex, Mapping[int, np.ndarray]]]):
        self.terms = [(complex(w), {int(k): as_operator(o) for k, o in p.items()}) for w, p in terms]

    @classmethod
    def product(cls, placements: Mapping[int, np.ndarray], weight: complex = 1.0) -> HistoryOperator:
        return cls([(weight, placements)])

    @classmethod
    def diagonal(cls, observables: Mapping[int, ObservableSpec]) -> HistoryOperator:
        return cls.product({k: o.operator() for k, o in observables.items()})

    def __add__(self, other: HistoryOperator) -> HistoryOperator:
        return HistoryOperator(self.terms + other.terms)

    def __mul__(self, c: complex) -> HistoryOperator:
        return HistoryOperator([(c * w, p) for w, p in self.terms])

    __rmul__ = __mul__

    def dense(self, slot_dims: Sequence[int]) -> np.ndarray:
        total = None
        for w, placements in self.terms:
            factors = []
            for k, d in enumerate(slot_dims, start=1):
                op = placements.get(k)
                if op is not None and op.shape[0] != d:
                    raise ValidationError(f"operator at slot {k} has dim {op.shape[0]}, slot has {d}")
                factors.append(np.eye(d, dtype=complex) if op is None else op)
            for k in placements:
                _check_slot(k, len(slot_dims))
            term = w * tensor_all(factors)
            total = term if total is None else total + term
        return total

    def is_hermitian(self, slot_dims: Sequence[int], tol: float = STRUCT_TOL) -> bool:
        return check_hermitian(self.dense(slot_dims), tol)


def history_expectation(hv: HistoryVector, op: HistoryOperator, observable: bool = True,
                        tol: float = STRUCT_TOL) -> float | complex:
    """``<Psi| op |Psi>`` on the dense embedding.

    With ``observable=True`` the operator must be Hermitian and the real
    part is returned; otherwise the raw complex value is returned.
    """
    dims = _slot_dims(hv)
    m = op.dense(dims)
    if observable and not check_hermitian(m, tol):
        raise ValidationError("history operator flagged as observable is not Hermitian")
    psi = hv.dense()
    value = complex(np.vdot(psi, m @ psi))
    return value.real if observable else value


def local_nonbasis_probability(spec: HistorySpec, slot: int, b: ObservableSpec, outcome: int) -> float:
    """Probability of outcome ``outcome`` of ``b`` at ``slot`` when ``spec``'s
    own observables are measured at every earlier slot.

    Computed as ``sum_{a_1..a_{i-1}} p(a_1, ..., a_{i-1}, beta)``.
    """
    spec.require_rank_one("local_nonbasis_probability")
    _check_slot(slot, spec.n)
    if b.dim != spec.dim:
        raise ValidationError(f"observable {b.name!r} has dim {b.dim}, slot has {spec.dim}")
    truncated = HistorySpec(
        spec.initial_state,
        spec.evolutions[:slot],
        list(spec.measurements[: slot - 1]) + [b],
    )
    total = 0.0
    for alpha in truncated.outcomes():
        if alpha[-1] == outcome:
            total += sequence_probability(truncated, alpha)
    return total


def born_local_probability(hv: HistoryVector, slot: int, vector) -> float:
    """Formal Born value ``<Psi| I x .. x |b><b| x .. x I |Psi>``.

    At the last slot this is the operational probability of ``b``. At an
    earlier slot the later measurements decohere the slot, and the value is
    ``sum p(a_1..a_i) |<b|a_i>|^2``: measuring the slot's own observable and
    then ``b`` at the same time.
    """
    return multitime_probability(hv, MultitimeProjector({slot: vector}))


@dataclass(frozen=True)
class NonBasisReport:
    """Operational and formal probabilities of ``b``'s outcomes at one slot.

    Only ``operational`` is a measurement prediction; ``formal`` is the
    history-space Born value and carries the ``FORMAL`` label.
    """

    slot: int
    observable: str
    operational: tuple[float, ...]
    formal: tuple[float, ...]
    label: str = "FORMAL"

    @property
    def max_gap(self) -> float:
        return max(abs(x - y) for x, y in zip(self.operational, self.formal))


def nonbasis_report(spec: HistorySpec, slot: int, b: ObservableSpec) -> NonBasisReport:
    hv = build_history_vector(spec)
    op = tuple(local_nonbasis_probability(spec, slot, b, k) for k in range(b.count))
    formal = tuple(born_local_probability(hv, slot, b.vector(k)) for k in range(b.count))
    return NonBasisReport(slot, b.name, op, formal)


@dataclass(frozen=True)
class IntermediateState:
    """Normalized state at ``t_1`` given preselection ``psi`` and
    postselection on ``beta_2``.

    ``weights[a]`` is ``|A(psi, a, beta_2)|^2 / N``, the ABL probability of
    obtaining ``a`` at ``t_1``.
    """

    state: np.ndarray
    normalization: float
    amplitudes: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2 / self.normalization

    def probability(self, vector) -> float:
        """``<psi_1| P_b |psi_1>`` for the normalized ket ``b``."""
        return abs(np.vdot(as_state(vector), self.state)) ** 2


def two_time_intermediate_state(spec: HistorySpec, b2: ObservableSpec, beta2: int,
                                tol: float = 1e-14) -> IntermediateState:
    """Build ``psi_1 ~ sum_a A(psi, a, beta_2) |a>`` for a two-slot spec.

    Raises
    ------
    PostselectionError
        If ``N = sum_a p(psi, a, beta_2)`` vanishes.
    """
    spec.require_rank_one("two_time_intermediate_state")
    if spec.n != 2:
        raise ValidationError(f"intermediate state needs a two-slot spec, got n={spec.n}")
    if not 0 <= beta2 < b2.count:
        raise ValidationError(f"beta2 index {beta2} out of range for {b2.name!r}")
    post = spec.replace(measurements=[spec.measurements[0], b2])
    a1 = spec.measurements[0]
    amps = np.array([amplitude(post, (a, beta2)) for a in range(a1.count)])
    norm = float(np.sum(np.abs(amps) ** 2))
    if norm <= tol:
        raise PostselectionError(
            f"postselection on outcome {beta2} of {b2.name!r} has zero probability (N={norm:.3g})")
    state = a1.basis @ amps / np.sqrt(norm)
    return IntermediateState(state, norm, amps)


def sample_histories(hv: HistoryVector, shots: int, seed: int | None = None) -> dict[tuple[int, ...], int]:
    """Draw ``shots`` outcome sequences from ``|A|^2``. For demonstrations only."""
    rng = np.random.default_rng(seed)
    keys = hv.content()
    p = np.array([hv.probability(k) for k in keys])
    counts = rng.multinomial(shots, p / p.sum())
    return {k: int(c) for k, c in zip(keys, counts) if c}


def sampled_average(hv: HistoryVector, slots: Sequence[int], shots: int,
                    seed: int | None = None) -> float:
    counts = sample_histories(hv, shots, seed)
    total = sum(c * np.prod([hv.eigenvalues[s - 1][k[s - 1]] for s in slots]) for k, c in counts.items())
    return float(total / shots)
