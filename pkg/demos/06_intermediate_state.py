"""Pre- and post-selected statistics at an intermediate time.

Given the initial state and a final outcome beta2, the state at t1 is the
normalized superposition of amplitudes A(psi, a, beta2). The joint Born
probability of (beta1, beta2) equals N <psi1|P_beta1|psi1>, where N is the
probability of the postselection itself.
"""
import numpy as np

from qhistories import (
    HistorySpec,
    MultitimeProjector,
    PostselectionError,
    build_history_vector,
    multitime_probability,
    two_time_intermediate_state,
)
from qhistories.states import X, pauli_z, xz_observable

psi = np.array([-1, 1]) / np.sqrt(2)
spec = HistorySpec(psi, [np.eye(2), X], [pauli_z(), pauli_z()])
st = two_time_intermediate_state(spec, pauli_z(), 0)
print(f"postselect Z=+1 at t2: N = {st.normalization:.6f}, psi1 = {np.round(st.state, 6)}")
print("ABL weights for Z at t1:", np.round(st.weights, 6))

b2 = xz_observable(0.7, "B2")
hv = build_history_vector(spec.replace(measurements=[pauli_z(), b2]))
for beta2 in range(2):
    st = two_time_intermediate_state(spec, b2, beta2)
    for beta1 in range(2):
        born = multitime_probability(hv, MultitimeProjector.for_outcomes(hv, {1: beta1, 2: beta2}))
        weighted = st.normalization * st.probability(hv.bases[0][:, beta1])
        print(f"  beta1={beta1} beta2={beta2}: Born {born:.6f}, N<P> {weighted:.6f}")

try:
    two_time_intermediate_state(HistorySpec([1, 0], [np.eye(2)] * 2, [pauli_z()] * 2), pauli_z(), 1)
except PostselectionError as exc:
    print("impossible postselection:", exc)
