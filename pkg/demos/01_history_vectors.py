"""History vectors for a qubit prepared in |+> and measured twice.

Measuring X at both times leaves a single history with amplitude 1. Measuring
Z at both times gives two perfectly correlated histories, and the history
vector lives in the two-slot space t1 (x) t2.
"""
import numpy as np

from qhistories import HistorySpec, build_history_vector, is_consistent_set, marginal_checks
from qhistories.states import pauli_x, pauli_z

plus = np.array([1, 1]) / np.sqrt(2)
identity = np.eye(2)

for label, obs in (("X", pauli_x()), ("Z", pauli_z())):
    spec = HistorySpec(plus, [identity, identity], [obs, obs])
    hv = build_history_vector(spec)
    print(f"{label} measured at t1 and t2")
    for alpha in hv.content():
        values = tuple(float(hv.eigenvalues[k][a]) for k, a in enumerate(alpha))
        print(f"  outcomes {values}: amplitude {hv.amplitude(alpha):.6f}")
    print("  dense embedding over |00>,|01>,|10>,|11>:", np.round(hv.dense().real, 6))
    print("  consistent set:", is_consistent_set(spec).consistent)
    print()

# A rotation between the measurements makes histories interfere.
theta = np.pi / 3
rot = np.array([[np.cos(theta / 2), -np.sin(theta / 2)], [np.sin(theta / 2), np.cos(theta / 2)]])
spec = HistorySpec([1, 0], [rot, rot, rot], [pauli_z()] * 3)
report = marginal_checks(spec)
print("three Z measurements with rotations in between")
print("  sum of probabilities - 1:", f"{report.total_probability_residual:.1e}")
print("  amplitude sum rule residuals:", [f"{r:.1e}" for r in report.amplitude_residuals])
print("  last-slot probability marginal residual:", f"{report.last_slot_probability_residual:.1e}")
print("  intermediate-slot probability marginals (interference):",
      [f"{r:.4f}" for r in report.intermediate_probability_residuals])
