"""Common kets, gates and observables with fixed eigenvector phases."""
from __future__ import annotations

import numpy as np

from .engine import ObservableSpec

SQRT1_2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT1_2
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def computational(d: int, name: str = "Z", eigenvalues=None) -> ObservableSpec:
    """Computational basis; qubit default labels ``|0> -> +1``, ``|1> -> -1``."""
    if eigenvalues is None:
        eigenvalues = [1.0, -1.0] if d == 2 else list(range(d))
    return ObservableSpec(name, eigenvalues, np.eye(d))


def pauli_z() -> ObservableSpec:
    return computational(2, "Z")


def xz_observable(phi: float, name: str | None = None) -> ObservableSpec:
    """``cos(phi) Z + sin(phi) X`` with eigenvectors listed ``+1`` first.

    ``|+1> = (cos phi/2, sin phi/2)`` and ``|-1> = (-sin phi/2, cos phi/2)``.
    """
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    return ObservableSpec(name or f"XZ({phi:g})", [1.0, -1.0], [[c, s], [-s, c]])


def pauli_x() -> ObservableSpec:
    return xz_observable(np.pi / 2, "X")
