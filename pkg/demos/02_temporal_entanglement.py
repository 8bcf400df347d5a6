"""A history state entangled across time, and its space/time reductions.

Preparing (|1> - |0>)/sqrt2, measuring Z, flipping with X and measuring Z
again yields a history vector that cannot be written as a product over the
t1 | t2 cut. Tracing out one time leaves a maximally mixed qubit.
"""
import numpy as np

from qhistories import (
    CompositeHistorySpec,
    HistorySpec,
    build_history_vector,
    is_product_history,
    pure_density,
    space_reduce,
    time_reduce,
    von_neumann_entropy,
)
from qhistories.states import CNOT, H, X, pauli_z

psi = np.array([-1, 1]) / np.sqrt(2)
hv = build_history_vector(HistorySpec(psi, [np.eye(2), X], [pauli_z(), pauli_z()]))
print("history content:", {k: round(v.real, 6) for k, v in hv.amplitudes.items()})

test = is_product_history(hv, [1])
print("Schmidt spectrum across t1 | t2:", np.round(test.singular_values, 6), "product:", test.is_product)

rho = pure_density(hv)
rho_t1 = time_reduce(rho, [1])
print("rho(t1) =\n", np.round(rho_t1.matrix.real, 6))
print(f"S(rho(t1)) = {von_neumann_entropy(rho_t1):.10f} nats (ln 2 = {np.log(2):.10f})")

# Two qubits A and B, entangled by the first step, measured at two times.
pair = CompositeHistorySpec(
    2, 2, [1, 0, 0, 0], [CNOT @ np.kron(H, np.eye(2)), np.eye(4)],
    [pauli_z(), pauli_z()], [pauli_z(), pauli_z()])
rho_a = space_reduce(pair, "A")
print("Alice's reduced history density matrix lives on", list(rho_a.space.labels))
print(f"S(rho_A) = {von_neumann_entropy(rho_a, base=2):.6f} bits")
