"""Temporal CHSH with two measurement times on one qubit.

Fixed-basis mode evaluates A x B on a single history vector built from Z
measurements. Per-pair mode builds a separate two-time history for every
observable pair; its averages match in magnitude and the violation appears
once A1 is replaced by -A1.
"""
import numpy as np

from qhistories import chsh_evaluate
from qhistories.states import X, pauli_x, pauli_z, xz_observable

psi = np.array([-1, 1]) / np.sqrt(2)
a1, b1 = pauli_x(), pauli_z()
a2 = xz_observable(-3 * np.pi / 4, "-(Z+X)/sqrt2")
b2 = xz_observable(-np.pi / 4, "(Z-X)/sqrt2")

for mode, flip in (("fixed-basis", False), ("per-pair", False), ("per-pair", True)):
    rep = chsh_evaluate(psi, np.eye(2), X, a1, b1, a2, b2, mode=mode, flip_a1=flip)
    tag = mode + (" with A1 -> -A1" if flip else "")
    averages = ", ".join(f"{k}={v:+.6f}" for k, v in rep.averages.items())
    print(f"{tag}: {averages}; S = {rep.s:.7f}, violated: {rep.violated}")

rep = chsh_evaluate(psi, np.eye(2), X, a1, b1, a2, b2, mode="per-pair")
print("\nper-pair joint probabilities:")
for pair, table in rep.tables.items():
    cells = ", ".join(f"p({x:+.0f},{y:+.0f})={p:.6f}" for (x, y), p in table.items())
    print(f"  {pair}: {cells}  (sum {sum(table.values()):.12f})")
