"""Dense complex linear algebra shared by every other module.

States are 1-d ``complex128`` arrays and operators are 2-d square arrays.
Spatial and temporal tensor products use the same Kronecker routine; only
the axis labels in a :class:`LabeledSpace` tell them apart.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

STRUCT_TOL = 1e-10
ARITH_TOL = 1e-12


def as_state(x, normalized: bool = False, tol: float = ARITH_TOL) -> np.ndarray:
    """Coerce ``x`` to a finite complex vector, optionally checking unit norm."""
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"state must be a non-empty 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state contains NaN or Inf")
    if normalized and abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"state is not normalized (norm {np.linalg.norm(v)!r})")
    return v


def as_operator(m) -> np.ndarray:
    """Coerce ``m`` to a finite square complex matrix."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator contains NaN or Inf")
    return a


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = as_state(v)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class LabeledSpace:
    """Ordered tensor-product axes, outermost first.

    Labels are strings. Time slots are ``"t1"``, ``"t2"``...; spatial
    factors inside a slot are ``"t1.A"``, ``"t1.B"``.
    """

    axes: tuple[tuple[str, int], ...]

    def __post_init__(self):
        axes = tuple((str(label), int(dim)) for label, dim in self.axes)
        labels = [label for label, _ in axes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate axis labels in {labels}")
        if any(dim < 1 for _, dim in axes):
            raise ValueError("axis dimensions must be positive")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def of(cls, *axes: tuple[str, int]) -> LabeledSpace:
        return cls(tuple(axes))

    @classmethod
    def time_slots(cls, dim: int, n: int) -> LabeledSpace:
        return cls(tuple((f"t{i + 1}", dim) for i in range(n)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.axes)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.axes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.axes else 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown axis label {label!r}; have {list(self.labels)}") from None

    def without(self, labels: Iterable[str]) -> LabeledSpace:
        drop = set(labels)
        return LabeledSpace(tuple(ax for ax in self.axes if ax[0] not in drop))

    def __add__(self, other: LabeledSpace) -> LabeledSpace:
        return LabeledSpace(self.axes + other.axes)


def tensor_product(x, y) -> np.ndarray:
    """Kronecker product with ``x``'s axes outermost.

    Both operands must be of the same kind (two vectors or two operators).
    """
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.ndim != y.ndim or x.ndim not in (1, 2):
        raise ValueError("tensor_product needs two vectors or two matrices")
    if x.ndim == 2:
        as_operator(x)
        as_operator(y)
    return np.kron(x, y)


def tensor_all(factors: Sequence) -> np.ndarray:
    if not factors:
        raise ValueError("need at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        out = tensor_product(out, f)
    return out


def partial_trace(rho, space: LabeledSpace, traced: Iterable[str]) -> np.ndarray:
    """Trace out the axes named in ``traced``; remaining axes keep their order.

    Tracing every axis returns a 1x1 matrix holding ``Tr(rho)``.
    """
    rho = as_operator(rho)
    if rho.shape[0] != space.dim:
        raise ValueError(f"operator dim {rho.shape[0]} does not match space dim {space.dim}")
    traced = set(traced)
    for label in traced:
        space.index(label)
    n = len(space.axes)
    dims = space.dims
    t = rho.reshape(dims + dims)
    keep = [k for k in range(n) if space.labels[k] not in traced]
    gone = [k for k in range(n) if space.labels[k] in traced]
    # move to (keep_row, keep_col, gone_row, gone_col) then contract the gone pairs
    t = t.transpose(keep + [n + k for k in keep] + gone + [n + k for k in gone])
    dk = int(np.prod([dims[k] for k in keep], dtype=np.int64))
    dg = int(np.prod([dims[k] for k in gone], dtype=np.int64))
    t = t.reshape(dk, dk, dg, dg)
    return np.trace(t, axis1=2, axis2=3)


def permute_axes(vec, space: LabeledSpace, order: Sequence[str]) -> tuple[np.ndarray, LabeledSpace]:
    """Reorder the tensor factors of a state vector to ``order``."""
    vec = as_state(vec)
    perm = [space.index(label) for label in order]
    if sorted(perm) != list(range(len(space.axes))):
        raise ValueError("order must be a permutation of the space labels")
    t = vec.reshape(space.dims).transpose(perm)
    return t.reshape(-1), LabeledSpace(tuple(space.axes[k] for k in perm))


def check_unitary(u, tol: float = STRUCT_TOL) -> bool:
    u = as_operator(u)
    resid = u.conj().T @ u - np.eye(u.shape[0])
    return bool(np.max(np.abs(resid)) <= tol)


def check_hermitian(m, tol: float = STRUCT_TOL) -> bool:
    m = as_operator(m)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol)


def hermitian_eig(m, tol: float = STRUCT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray
        Real, ascending.
    eigenvectors : ndarray
        Orthonormal columns; ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``.
    """
    m = as_operator(m)
    if not check_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    # symmetrize so LAPACK sees an exactly Hermitian input
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return w, v


def is_orthonormal(vectors, tol: float = STRUCT_TOL) -> bool:
    b = np.column_stack([as_state(v) for v in vectors])
    return bool(np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1]))) <= tol)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
