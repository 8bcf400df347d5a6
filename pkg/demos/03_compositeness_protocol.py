"""Turning a sequence of measurements on one system into a static composite state.

At each measured time a fresh twin is adjoined in the first basis ket, the
clone gate V copies the current eigenbasis label onto it, and the twin keeps
evolving. The final state's coefficients are the history amplitudes.
"""
import numpy as np

from qhistories import HistorySpec, ObservableSpec, run_protocol, verify_protocol_equivalence
from qhistories.protocol import clone_gate, protocol_amplitudes
from qhistories.states import CNOT
from qhistories.tensor import random_state, random_unitary

print("d=2 clone gate equals CNOT:", np.array_equal(clone_gate(np.eye(2)).matrix, CNOT))
print("d=3 clone permutation (flat index i*d+j -> image):", clone_gate(np.eye(3)).permutation)

rng = np.random.default_rng(2024)
d, n = 3, 3
bases = [random_unitary(d, rng) for _ in range(n)]
spec = HistorySpec(
    random_state(d, rng),
    [random_unitary(d, rng) for _ in range(n)],
    [ObservableSpec(f"O{k + 1}", [0, 1, 2], b.T) for k, b in enumerate(bases)],
)
final, trace = run_protocol(spec)
for label, norm in zip(trace.labels, trace.norms()):
    print(f"  {label:<20} norm {norm:.15f}")
amps = protocol_amplitudes(spec, final)
print("largest protocol amplitudes:")
for idx in np.argsort(-np.abs(amps).ravel())[:4]:
    alpha = np.unravel_index(idx, amps.shape)
    print(f"  {tuple(int(a) for a in alpha)}: {amps[alpha]:.6f}")
report = verify_protocol_equivalence(spec)
print(f"matches the history vector: {report.passed} (max residual {report.max_residual:.1e})")
