"""Chain operators, history amplitudes and history vectors.

Outcomes are always addressed by 0-based eigenvector index, never by
eigenvalue. Slots are numbered from 1, so slot ``k`` lives at time ``t_k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import EnumerationCapError, ValidationError
from .tensor import (
    ARITH_TOL,
    STRUCT_TOL,
    LabeledSpace,
    as_operator,
    as_state,
    check_unitary,
    projector,
)

DEFAULT_CAP = 2**20
PRUNE_TOL = 1e-12


class ObservableSpec:
    """A complete orthonormal eigenbasis with one real label per vector.

    Parameters
    ----------
    name : str
    eigenvalues : sequence of float
        ``eigenvalues[k]`` labels ``eigenvectors[k]``. Repeats are allowed.
    eigenvectors : sequence of vectors
        Must form an orthonormal basis of the slot space.
    """

    def __init__(self, name: str, eigenvalues, eigenvectors, tol: float = STRUCT_TOL):
        vecs = [as_state(v) for v in eigenvectors]
        if not vecs:
            raise ValidationError(f"observable {name!r}: no eigenvectors")
        d = vecs[0].size
        if any(v.size != d for v in vecs) or len(vecs) != d:
            raise ValidationError(
                f"observable {name!r}: need {d} eigenvectors of length {d}, got "
                f"{[v.size for v in vecs]}"
            )
        vals = np.asarray(eigenvalues, dtype=float)
        if vals.shape != (d,) or not np.all(np.isfinite(vals)):
            raise ValidationError(f"observable {name!r}: need {d} finite real eigenvalues")
        basis = np.column_stack(vecs)
        err = np.max(np.abs(basis.conj().T @ basis - np.eye(d)))
        if err > tol:
            raise ValidationError(
                f"observable {name!r}: eigenvectors are not orthonormal (max deviation {err:.3g})"
            )
        self.name = str(name)
        self.eigenvalues = vals
        self.basis = basis
        self.basis.flags.writeable = False
        self.eigenvalues.flags.writeable = False
        self._projectors = tuple(projector(basis[:, k]) for k in range(d))
        for pk in self._projectors:
            pk.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def count(self) -> int:
        return self.basis.shape[1]

    def vector(self, k: int) -> np.ndarray:
        return self.basis[:, k]

    def projector(self, k: int) -> np.ndarray:
        return self._projectors[k]

    def operator(self) -> np.ndarray:
        return (self.basis * self.eigenvalues) @ self.basis.conj().T

    def projector_set(self) -> ProjectorSet:
        return ProjectorSet([self.projector(k) for k in range(self.count)])

    def negated(self) -> ObservableSpec:
        name = self.name[1:] if self.name.startswith("-") else "-" + self.name
        return ObservableSpec(name, -self.eigenvalues, self.basis.T)

    def index_of(self, value: float) -> int:
        """Index of the unique eigenvector labelled ``value``."""
        hits = np.flatnonzero(np.abs(self.eigenvalues - value) <= 1e-12)
        if hits.size != 1:
            raise ValidationError(f"observable {self.name!r}: eigenvalue {value} is not unique")
        return int(hits[0])

    def __repr__(self):
        return f"ObservableSpec({self.name!r}, eigenvalues={self.eigenvalues.tolist()})"


class ProjectorSet:
    """Orthogonal projectors resolving the identity, possibly of rank > 1."""

    def __init__(self, projectors, tol: float = STRUCT_TOL):
        ps = [as_operator(p) for p in projectors]
        if not ps:
            raise ValidationError("empty projector set")
        d = ps[0].shape[0]
        if any(p.shape != (d, d) for p in ps):
            raise ValidationError("projectors have mismatched dimensions")
        for k, p in enumerate(ps):
            if np.max(np.abs(p - p.conj().T)) > tol:
                raise ValidationError(f"projector {k} is not Hermitian")
            for l, q in enumerate(ps):
                target = p if k == l else np.zeros_like(p)
                if np.max(np.abs(p @ q - target)) > tol:
                    raise ValidationError(f"projectors {k},{l} violate P_k P_l = delta_kl P_k")
        if np.max(np.abs(sum(ps) - np.eye(d))) > tol:
            raise ValidationError("projectors do not sum to the identity")
        self.projectors = tuple(ps)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def count(self) -> int:
        return len(self.projectors)

    def projector(self, k: int) -> np.ndarray:
        return self.projectors[k]


Measurement = "ObservableSpec | ProjectorSet"


class HistorySpec:
    """Initial state at ``t_0``, one unitary per step, one measurement per slot.

    ``evolutions[k]`` evolves from ``t_k`` to ``t_{k+1}``, so the first entry
    is ``U(t_1, t_0)``.
    """

    def __init__(self, initial_state, evolutions: Sequence, measurements: Sequence,
                 tol: float = STRUCT_TOL):
        psi = as_state(initial_state)
        if abs(np.linalg.norm(psi) - 1.0) > ARITH_TOL:
            raise ValidationError(f"initial state has norm {np.linalg.norm(psi)!r}, expected 1")
        evolutions = [as_operator(u) for u in evolutions]
        measurements = list(measurements)
        if len(evolutions) != len(measurements):
            raise ValidationError(
                f"{len(evolutions)} evolutions but {len(measurements)} measurements"
            )
        if not evolutions:
            raise ValidationError("a history needs at least one measured time")
        d = psi.size
        for k, u in enumerate(evolutions):
            if u.shape != (d, d):
                raise ValidationError(f"evolutions[{k}] has shape {u.shape}, expected {(d, d)}")
            if not check_unitary(u, tol):
                raise ValidationError(f"evolutions[{k}] is not unitary")
        for k, m in enumerate(measurements):
            if not isinstance(m, (ObservableSpec, ProjectorSet)):
                raise ValidationError(f"measurements[{k}] must be an ObservableSpec or ProjectorSet")
            if m.dim != d:
                raise ValidationError(f"measurements[{k}] acts on dim {m.dim}, expected {d}")
        self.initial_state = psi
        self.evolutions = tuple(evolutions)
        self.measurements = tuple(measurements)

    @property
    def dim(self) -> int:
        return self.initial_state.size

    @property
    def n(self) -> int:
        return len(self.evolutions)

    @property
    def rank_one(self) -> bool:
        return all(isinstance(m, ObservableSpec) for m in self.measurements)

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return tuple(m.count for m in self.measurements)

    def outcomes(self) -> Iterator[tuple[int, ...]]:
        """All outcome sequences in lexicographic order."""
        return itertools.product(*(range(c) for c in self.outcome_counts))

    def n_outcomes(self) -> int:
        return int(np.prod(self.outcome_counts, dtype=np.int64))

    def check_alpha(self, alpha) -> tuple[int, ...]:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.n:
            raise ValidationError(f"outcome sequence has length {len(alpha)}, expected {self.n}")
        for k, (a, c) in enumerate(zip(alpha, self.outcome_counts)):
            if not 0 <= a < c:
                raise ValidationError(f"outcome index {a} at slot {k + 1} out of range [0, {c})")
        return alpha

    def require_rank_one(self, what: str):
        if not self.rank_one:
            raise ValidationError(f"{what} needs rank-1 measurements (ObservableSpec) at every slot")

    def replace(self, initial_state=None, evolutions=None, measurements=None) -> HistorySpec:
        return HistorySpec(
            self.initial_state if initial_state is None else initial_state,
            self.evolutions if evolutions is None else evolutions,
            self.measurements if measurements is None else measurements,
        )


def chain_operator(spec: HistorySpec, alpha) -> np.ndarray:
    """``P_{a_n} U_n ... P_{a_1} U_1 P_psi`` for the outcome sequence ``alpha``."""
    alpha = spec.check_alpha(alpha)
    psi = spec.initial_state
    c = np.outer(psi, psi.conj())
    for u, m, a in zip(spec.evolutions, spec.measurements, alpha):
        c = m.projector(a) @ (u @ c)
    return c


def amplitude(spec: HistorySpec, alpha) -> complex:
    """History amplitude ``<a_n| U_n P_{a_{n-1}} ... P_{a_1} U_1 |psi>``."""
    spec.require_rank_one("amplitude")
    alpha = spec.check_alpha(alpha)
    v = spec.initial_state
    last = spec.n - 1
    for k, (u, m, a) in enumerate(zip(spec.evolutions, spec.measurements, alpha)):
        v = u @ v
        if k < last:
            v = m.projector(a) @ v
    return complex(np.vdot(spec.measurements[last].vector(alpha[last]), v))


def sequence_probability(spec: HistorySpec, alpha, method: str = "auto") -> float:
    """Probability of observing ``alpha`` at every slot.

    ``method="amplitude"`` uses ``|A|^2`` (rank-1 only); ``"chain"`` uses
    ``Tr(C C^dagger)``. ``"auto"`` picks the amplitude route when possible.
    """
    if method == "auto":
        method = "amplitude" if spec.rank_one else "chain"
    if method == "amplitude":
        return abs(amplitude(spec, alpha)) ** 2
    if method == "chain":
        c = chain_operator(spec, alpha)
        return float(np.real(np.vdot(c, c)))
    raise ValueError(f"unknown method {method!r}")


def decoherence_functional(spec: HistorySpec, alpha, beta) -> complex:
    """``D(alpha, beta) = Tr(C_alpha C_beta^dagger)``."""
    ca = chain_operator(spec, alpha)
    cb = chain_operator(spec, beta)
    # Tr(A B^dagger) = sum_ij A_ij conj(B_ij)
    return complex(np.sum(ca * cb.conj()))


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    witness: tuple[tuple[int, ...], tuple[int, ...]] | None
    max_interference: float

    def __bool__(self):
        return self.consistent


def _check_cap(spec: HistorySpec, cap: int):
    if spec.n_outcomes() > cap:
        raise EnumerationCapError(
            f"{spec.n_outcomes()} outcome sequences exceed the enumeration cap {cap}"
        )


def is_consistent_set(spec: HistorySpec, tol: float = STRUCT_TOL,
                      cap: int = 2**12) -> ConsistencyResult:
    """Check ``|2 Re D(alpha, beta)| <= tol`` for every pair of distinct histories.

    The witness is the pair with the largest interference term when the
    check fails.
    """
    _check_cap(spec, cap)
    alphas = list(spec.outcomes())
    flat = np.array([chain_operator(spec, a).ravel() for a in alphas])
    gram = flat @ flat.conj().T  # gram[a, b] = Tr(C_a C_b^dagger)
    interf = 2 * np.abs(gram.real)
    np.fill_diagonal(interf, 0.0)
    i, j = np.unravel_index(np.argmax(interf), interf.shape)
    worst = float(interf[i, j])
    if worst <= tol:
        return ConsistencyResult(True, None, worst)
    return ConsistencyResult(False, (alphas[i], alphas[j]), worst)


def reduce_schedule(spec: HistorySpec, keep: Sequence[int]) -> HistorySpec:
    """Keep only the 1-based slots in ``keep``; the others go unmeasured.

    Unitaries across dropped slots are composed; slots after the last kept
    one are discarded since they cannot affect earlier outcomes.
    """
    keep = [int(k) for k in keep]
    if not keep:
        raise ValidationError("keep must name at least one slot")
    if keep != sorted(set(keep)) or keep[0] < 1 or keep[-1] > spec.n:
        raise ValidationError(f"keep must be ascending slots within 1..{spec.n}, got {keep}")
    evolutions = []
    prev = 0
    for k in keep:
        u = np.eye(spec.dim, dtype=complex)
        for step in range(prev, k):
            u = spec.evolutions[step] @ u
        evolutions.append(u)
        prev = k
    return HistorySpec(spec.initial_state, evolutions, [spec.measurements[k - 1] for k in keep])


class HistoryVector:
    """Sparse superposition of histories, keyed by outcome-index tuples.

    Only amplitudes with modulus above ``prune_tol`` are stored; those
    tuples form the history content. ``bases[k]`` holds the slot-``k+1``
    eigenvectors as columns and ``space`` labels the dense embedding.
    """

    def __init__(self, amplitudes: dict, bases: Sequence[np.ndarray],
                 eigenvalues: Sequence[np.ndarray] | None = None,
                 space: LabeledSpace | None = None, spec: HistorySpec | None = None,
                 prune_tol: float = PRUNE_TOL, tol: float = STRUCT_TOL):
        self.bases = tuple(np.asarray(b, dtype=complex) for b in bases)
        self.eigenvalues = None if eigenvalues is None else tuple(
            np.asarray(e, dtype=float) for e in eigenvalues)
        counts = tuple(b.shape[1] for b in self.bases)
        kept = {}
        for key in sorted(amplitudes):
            a = complex(amplitudes[key])
            if len(key) != len(counts) or any(not 0 <= i < c for i, c in zip(key, counts)):
                raise ValidationError(f"outcome tuple {key} does not fit slot counts {counts}")
            if abs(a) > prune_tol:
                kept[tuple(int(i) for i in key)] = a
        norm = sum(abs(a) ** 2 for a in kept.values())
        if abs(norm - 1.0) > tol:
            raise ValidationError(f"history vector has squared norm {norm!r}, expected 1")
        self.amplitudes = kept
        self.spec = spec
        self.space = space if space is not None else LabeledSpace(
            tuple((f"t{k + 1}", b.shape[0]) for k, b in enumerate(self.bases)))
        if self.space.dim != int(np.prod([b.shape[0] for b in self.bases])):
            raise ValidationError("labeled space does not match the slot dimensions")

    @property
    def n(self) -> int:
        return len(self.bases)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.bases)

    def amplitude(self, alpha) -> complex:
        return self.amplitudes.get(tuple(alpha), 0j)

    def probability(self, alpha) -> float:
        return abs(self.amplitude(alpha)) ** 2

    def content(self) -> list[tuple[int, ...]]:
        return list(self.amplitudes)

    def probabilities(self) -> dict[tuple[int, ...], float]:
        return {k: abs(a) ** 2 for k, a in self.amplitudes.items()}

    def amplitude_tensor(self) -> np.ndarray:
        t = np.zeros(self.counts, dtype=complex)
        for key, a in self.amplitudes.items():
            t[key] = a
        return t

    def dense(self) -> np.ndarray:
        """Embedding ``sum_a A(a) |a_1> x ... x |a_n>`` in the computational basis."""
        t = self.amplitude_tensor()
        for k, b in enumerate(self.bases):
            # replace outcome axis k by the slot's computational axis
            t = np.moveaxis(np.tensordot(b, t, axes=([1], [k])), 0, k)
        return t.reshape(-1)

    def __repr__(self):
        return f"HistoryVector(n={self.n}, content={len(self.amplitudes)} histories)"


def _transfer_amplitudes(spec: HistorySpec) -> np.ndarray:
    """Dense amplitude tensor built slot by slot with the merging rule
    ``A(psi, a_1..a_k) = A(psi, a_1..a_{k-1}) <a_k|U_k|a_{k-1}>``."""
    bases = [m.basis for m in spec.measurements]
    t = bases[0].conj().T @ (spec.evolutions[0] @ spec.initial_state)
    for k in range(1, spec.n):
        transfer = bases[k].conj().T @ spec.evolutions[k] @ bases[k - 1]  # [a_k, a_{k-1}]
        t = t[..., None] * transfer.T.reshape((1,) * (k - 1) + transfer.T.shape)
    return t


def build_history_vector(spec: HistorySpec, cap: int = DEFAULT_CAP,
                         prune_tol: float = PRUNE_TOL) -> HistoryVector:
    spec.require_rank_one("build_history_vector")
    _check_cap(spec, cap)
    t = _transfer_amplitudes(spec)
    amps = {idx: t[idx] for idx in zip(*np.nonzero(np.abs(t) > prune_tol))}
    amps = {tuple(int(i) for i in k): v for k, v in amps.items()}
    return HistoryVector(
        amps,
        [m.basis for m in spec.measurements],
        [m.eigenvalues for m in spec.measurements],
        LabeledSpace.time_slots(spec.dim, spec.n),
        spec=spec,
        prune_tol=prune_tol,
    )


@dataclass
class MarginalReport:
    """Residuals of the history sum rules.

    ``amplitude_residuals[k]`` is for summing out slot ``k+1`` (intermediate
    slots only); ``intermediate_probability_residuals`` are diagnostics and
    are generally nonzero.
    """

    amplitude_residuals: list[float] = field(default_factory=list)
    total_probability_residual: float = 0.0
    last_slot_probability_residual: float = 0.0
    intermediate_probability_residuals: list[float] = field(default_factory=list)

    @property
    def max_amplitude_residual(self) -> float:
        return max(self.amplitude_residuals, default=0.0)


def marginal_checks(spec: HistorySpec, cap: int = DEFAULT_CAP) -> MarginalReport:
    spec.require_rank_one("marginal_checks")
    _check_cap(spec, cap)
    full = _amplitude_table(spec)
    probs = np.abs(full) ** 2
    report = MarginalReport(total_probability_residual=abs(float(probs.sum()) - 1.0))
    n = spec.n
    for k in range(n - 1):
        # summing out a measured intermediate slot == leaving it unmeasured
        reduced = _amplitude_table(reduce_schedule(spec, [j for j in range(1, n + 1) if j != k + 1]))
        report.amplitude_residuals.append(float(np.max(np.abs(full.sum(axis=k) - reduced))))
        report.intermediate_probability_residuals.append(
            float(np.max(np.abs(probs.sum(axis=k) - np.abs(reduced) ** 2))))
    if n > 1:
        shorter = _amplitude_table(reduce_schedule(spec, list(range(1, n))))
        report.last_slot_probability_residual = float(
            np.max(np.abs(probs.sum(axis=n - 1) - np.abs(shorter) ** 2)))
    return report


def _amplitude_table(spec: HistorySpec) -> np.ndarray:
    t = np.empty(spec.outcome_counts, dtype=complex)
    for alpha in spec.outcomes():
        t[alpha] = amplitude(spec, alpha)
    return t
