"""History density matrices, their space and time reductions, entropy and
product-state tests."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .engine import (
    DEFAULT_CAP,
    HistorySpec,
    HistoryVector,
    ObservableSpec,
    build_history_vector,
)
from .errors import ValidationError
from .observables import MultitimeProjector
from .tensor import (
    ARITH_TOL,
    STRUCT_TOL,
    LabeledSpace,
    as_operator,
    check_hermitian,
    partial_trace,
    permute_axes,
    projector,
    tensor_all,
)

NEG_EIG_TOL = 1e-9


def slot_of(label: str) -> int:
    """``"t3"`` and ``"t3.A"`` both live in slot 3."""
    head = label.split(".", 1)[0]
    if not head.startswith("t") or not head[1:].isdigit():
        raise ValidationError(f"label {label!r} does not name a time slot")
    return int(head[1:])


class HistoryDensityMatrix:
    """Hermitian, positive, unit-trace operator on a labeled space."""

    def __init__(self, space: LabeledSpace, matrix, tol: float = STRUCT_TOL):
        m = as_operator(matrix)
        if m.shape[0] != space.dim:
            raise ValidationError(f"matrix dim {m.shape[0]} does not match space dim {space.dim}")
        if not check_hermitian(m, tol):
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValidationError(f"density matrix has trace {np.trace(m)!r}")
        lo = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
        if lo < -NEG_EIG_TOL:
            raise ValidationError(f"density matrix has negative eigenvalue {lo:.3g}")
        self.space = space
        self.matrix = m

    @property
    def slots(self) -> list[int]:
        return sorted({slot_of(label) for label in self.space.labels})

    def slot_dims(self) -> list[int]:
        dims: dict[int, int] = {}
        for label, d in self.space.axes:
            dims[slot_of(label)] = dims.get(slot_of(label), 1) * d
        return [dims[k] for k in self.slots]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self):
        return f"HistoryDensityMatrix(labels={list(self.space.labels)})"


def pure_density(hv: HistoryVector) -> HistoryDensityMatrix:
    psi = hv.dense()
    return HistoryDensityMatrix(hv.space, np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class HistoryEnsemble:
    members: tuple[tuple[float, HistoryVector], ...]

    def __post_init__(self):
        members = tuple((float(w), hv) for w, hv in self.members)
        if not members:
            raise ValidationError("empty ensemble")
        if any(w < 0 for w, _ in members):
            raise ValidationError("ensemble weights must be nonnegative")
        total = sum(w for w, _ in members)
        if abs(total - 1.0) > ARITH_TOL:
            raise ValidationError(f"ensemble weights sum to {total!r}, expected 1")
        space = members[0][1].space
        if any(hv.space != space for _, hv in members):
            raise ValidationError("ensemble members live on different spaces")
        object.__setattr__(self, "members", members)


def density_from_ensemble(ens: HistoryEnsemble) -> HistoryDensityMatrix:
    space = ens.members[0][1].space
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for w, hv in ens.members:
        psi = hv.dense()
        rho += w * np.outer(psi, psi.conj())
    return HistoryDensityMatrix(space, rho)


def probability_from_density(rho: HistoryDensityMatrix, proj: MultitimeProjector) -> float:
    """``Tr(rho P)`` for a projector placed at every slot of ``rho``."""
    slots = rho.slots
    if sorted(proj.placements) != slots:
        raise ValidationError(f"projector must cover slots {slots}, got {sorted(proj.placements)}")
    factors = []
    for k, d in zip(slots, rho.slot_dims()):
        g = proj.placements[k]
        if g.size != d:
            raise ValidationError(f"placement at slot {k} has dim {g.size}, slot has {d}")
        factors.append(projector(g))
    return float(np.real(np.trace(rho.matrix @ tensor_all(factors))))


class CompositeHistorySpec:
    """Two subsystems A and B measured jointly by local observables at every slot.

    The joint outcome at a slot is the pair ``(a, b)``, flattened to
    ``a * dim_b + b``. The joint eigenvalue label is ``lambda_a * lambda_b``.
    """

    def __init__(self, dim_a: int, dim_b: int, initial_state, evolutions: Sequence,
                 measurements_a: Sequence[ObservableSpec], measurements_b: Sequence[ObservableSpec]):
        if len(measurements_a) != len(measurements_b):
            raise ValidationError(
                f"{len(measurements_a)} A-measurements but {len(measurements_b)} B-measurements")
        for k, (ma, mb) in enumerate(zip(measurements_a, measurements_b)):
            if ma.dim != dim_a:
                raise ValidationError(f"measurements_a[{k}] has dim {ma.dim}, expected {dim_a}")
            if mb.dim != dim_b:
                raise ValidationError(f"measurements_b[{k}] has dim {mb.dim}, expected {dim_b}")
        joint = [
            ObservableSpec(
                f"{ma.name}*{mb.name}",
                np.kron(ma.eigenvalues, mb.eigenvalues),
                np.kron(ma.basis, mb.basis).T,
            )
            for ma, mb in zip(measurements_a, measurements_b)
        ]
        self.dim_a = int(dim_a)
        self.dim_b = int(dim_b)
        self.measurements_a = tuple(measurements_a)
        self.measurements_b = tuple(measurements_b)
        self.joint = HistorySpec(initial_state, evolutions, joint)

    @property
    def n(self) -> int:
        return self.joint.n

    def space(self) -> LabeledSpace:
        axes = []
        for k in range(1, self.n + 1):
            axes += [(f"t{k}.A", self.dim_a), (f"t{k}.B", self.dim_b)]
        return LabeledSpace(tuple(axes))

    def split(self, joint_index: int) -> tuple[int, int]:
        return divmod(int(joint_index), self.dim_b)

    def history_vector(self, cap: int = DEFAULT_CAP) -> HistoryVector:
        hv = build_history_vector(self.joint, cap=cap)
        return HistoryVector(hv.amplitudes, hv.bases, hv.eigenvalues, self.space(), spec=self.joint)

    def side_projector(self, subsystem: str, outcomes: Sequence[int]) -> MultitimeProjector:
        """Projector onto one side's eigenvectors, one outcome per slot."""
        ms = self.measurements_a if subsystem == "A" else self.measurements_b
        return MultitimeProjector({k + 1: ms[k].vector(a) for k, a in enumerate(outcomes)})


def _other(subsystem: str) -> str:
    if subsystem not in ("A", "B"):
        raise ValidationError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return "B" if subsystem == "A" else "A"


def space_reduce_density(rho: HistoryDensityMatrix, subsystem: str) -> HistoryDensityMatrix:
    """Keep ``subsystem`` by tracing the other factor at every slot."""
    drop = "." + _other(subsystem)
    traced = [label for label in rho.space.labels if label.endswith(drop)]
    if not traced:
        raise ValidationError(f"space has no {_other(subsystem)} factors: {list(rho.space.labels)}")
    out = partial_trace(rho.matrix, rho.space, traced)
    return HistoryDensityMatrix(rho.space.without(traced), out)


def space_reduce(spec: CompositeHistorySpec, subsystem: str,
                 cap: int = DEFAULT_CAP) -> HistoryDensityMatrix:
    """Reduced history density matrix of one party, the other measured at all times."""
    _other(subsystem)
    return space_reduce_density(pure_density(spec.history_vector(cap)), subsystem)


def time_reduce(rho: HistoryDensityMatrix, keep: Iterable[int]) -> HistoryDensityMatrix:
    """Trace out every slot not in ``keep`` (1-based)."""
    keep = {int(k) for k in keep}
    if not keep:
        raise ValidationError("keep must name at least one slot")
    unknown = keep - set(rho.slots)
    if unknown:
        raise ValidationError(f"unknown slots {sorted(unknown)}; have {rho.slots}")
    traced = [label for label in rho.space.labels if slot_of(label) not in keep]
    if not traced:
        return rho
    out = partial_trace(rho.matrix, rho.space, traced)
    return HistoryDensityMatrix(rho.space.without(traced), out)


def von_neumann_entropy(rho, base: str | float = "e") -> float:
    """``-Tr(rho log rho)``; ``base`` is ``"e"`` or ``2``."""
    m = rho.matrix if isinstance(rho, HistoryDensityMatrix) else as_operator(rho)
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if w[0] < -NEG_EIG_TOL:
        raise ValidationError(f"not a density matrix: eigenvalue {w[0]:.3g}")
    w = w[w > 0]
    s = float(-np.sum(w * np.log(w)))
    if base in ("e", None):
        return s
    if base in (2, "2"):
        return s / np.log(2)
    raise ValueError(f"unsupported base {base!r}")


@dataclass(frozen=True)
class ProductTest:
    is_product: bool
    singular_values: np.ndarray


def _cut_labels(space: LabeledSpace, cut) -> list[str]:
    labels = []
    for c in cut:
        if isinstance(c, (int, np.integer)):
            labels += [label for label in space.labels if slot_of(label) == int(c)]
        else:
            space.index(c)
            labels.append(c)
    return labels


def schmidt_spectrum(vec, space: LabeledSpace, cut) -> np.ndarray:
    """Singular values of the amplitude matrix across ``cut | rest``.

    ``cut`` names one side, by label or by slot number.
    """
    side = _cut_labels(space, cut)
    rest = [label for label in space.labels if label not in side]
    if not side or not rest:
        raise ValidationError("cut must leave both sides non-empty")
    v, _ = permute_axes(vec, space, side + rest)
    rows = int(np.prod([space.dims[space.index(label)] for label in side]))
    return np.linalg.svd(v.reshape(rows, -1), compute_uv=False)


def is_product_history(hv: HistoryVector, cut, tol: float = STRUCT_TOL) -> ProductTest:
    s = schmidt_spectrum(hv.dense(), hv.space, cut)
    second = s[1] if s.size > 1 else 0.0
    return ProductTest(bool(second <= tol), s)


def history_product(hv_a: HistoryVector, hv_b: HistoryVector) -> HistoryVector:
    """Composite history vector with factorized amplitudes ``A(a) B(b)``."""
    if hv_a.n != hv_b.n:
        raise ValidationError("both history vectors need the same number of slots")
    bases = [np.kron(ba, bb) for ba, bb in zip(hv_a.bases, hv_b.bases)]
    amps = {}
    for ka, a in hv_a.amplitudes.items():
        for kb, b in hv_b.amplitudes.items():
            amps[tuple(i * cb + j for i, j, cb in zip(ka, kb, hv_b.counts))] = a * b
    axes = []
    for k, (ba, bb) in enumerate(zip(hv_a.bases, hv_b.bases), start=1):
        axes += [(f"t{k}.A", ba.shape[0]), (f"t{k}.B", bb.shape[0])]
    eig = None
    if hv_a.eigenvalues is not None and hv_b.eigenvalues is not None:
        eig = [np.kron(ea, eb) for ea, eb in zip(hv_a.eigenvalues, hv_b.eigenvalues)]
    return HistoryVector(amps, bases, eig, LabeledSpace(tuple(axes)))

