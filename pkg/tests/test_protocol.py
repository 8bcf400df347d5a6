import numpy as np
import pytest

from _gen import random_observable, random_spec, random_specs
from qhistories import EnumerationCapError, HistorySpec, build_history_vector, run_protocol, verify_protocol_equivalence
from qhistories.protocol import clone_gate, clone_permutation, is_unitary_clone, protocol_amplitudes
from qhistories.states import CNOT, pauli_x, pauli_z
from qhistories.tensor import ket

R2 = 1 / np.sqrt(2)
PLUS = np.array([1, 1]) * R2


def test_d2_clone_gate_is_cnot():
    assert np.array_equal(clone_gate(np.eye(2)).matrix, CNOT)


@pytest.mark.parametrize("d", range(2, 9))
def test_clone_gate_unitary_permutation(d):
    g = clone_gate(np.eye(d))
    assert is_unitary_clone(d)
    assert sorted(g.permutation) == list(range(d * d))
    assert set(np.unique(g.matrix.real)) <= {0.0, 1.0}
    assert np.all(g.matrix.sum(axis=0) == 1) and np.all(g.matrix.sum(axis=1) == 1)


def test_d3_images_enumerated():
    d = 3
    v = clone_gate(np.eye(d)).matrix
    images = {}
    for i in range(d):
        for j in range(d):
            out = v @ np.kron(ket(i, d), ket(j, d))
            images[(i, j)] = divmod(int(np.argmax(np.abs(out))), d)
    # twin prepared in the special ket receives a copy
    assert all(images[(i, 0)] == (i, i) for i in range(d))
    assert all(images[(i, i)] == (i, 0) for i in range(1, d))
    assert images[(1, 2)] == (1, 2) and images[(2, 1)] == (2, 1)
    assert len(set(images.values())) == d * d


def test_clone_in_rotated_basis_copies_eigenvectors():
    obs = random_observable(3, np.random.default_rng(41))
    v = clone_gate(obs).matrix
    for i in range(3):
        out = v @ np.kron(obs.vector(i), obs.vector(0))
        np.testing.assert_allclose(out, np.kron(obs.vector(i), obs.vector(i)), atol=1e-13)


def test_clone_permutation_table():
    assert clone_permutation(2) == [0, 1, 3, 2]


def test_protocol_reference_examples():
    final, trace = run_protocol(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_z()] * 2))
    np.testing.assert_allclose(final, [R2, 0, 0, R2], atol=1e-15)
    final, _ = run_protocol(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_x()] * 2))
    np.testing.assert_allclose(final, [0.5] * 4, atol=1e-15)
    assert trace.labels[0] == "evolve t0->t1"
    assert all(abs(x - 1) < 1e-10 for x in trace.norms())


def test_single_slot_protocol_is_just_evolution():
    spec = random_spec(3, 1, np.random.default_rng(42))
    final, trace = run_protocol(spec)
    np.testing.assert_allclose(final, spec.evolutions[0] @ spec.initial_state, atol=1e-15)
    assert len(trace.states) == 1


def test_correlated_z_equivalence_exact():
    rep = verify_protocol_equivalence(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_z()] * 2))
    assert rep.passed and rep.max_residual <= 1e-14


@pytest.mark.parametrize("spec", random_specs(30, 43, dims=(2,), lengths=(2, 3)) + random_specs(5, 44, dims=(3,), lengths=(2,)))
def test_random_equivalence(spec):
    rep = verify_protocol_equivalence(spec)
    assert rep.passed, rep
    assert rep.max_norm_deviation < 1e-10


def test_protocol_reproduces_zero_amplitudes():
    # Z then Z with identity evolution: (0,1) and (1,0) vanish
    spec = HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_z()] * 2)
    final, _ = run_protocol(spec)
    amps = protocol_amplitudes(spec, final)
    assert abs(amps[0, 1]) < 1e-15 and abs(amps[1, 0]) < 1e-15
    hv = build_history_vector(spec)
    assert hv.amplitude((0, 1)) == 0


def test_protocol_cap():
    with pytest.raises(EnumerationCapError):
        run_protocol(random_spec(2, 4, np.random.default_rng(0)), cap=8)
