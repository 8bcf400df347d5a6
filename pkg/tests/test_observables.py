import numpy as np
import pytest

from _gen import random_observable, random_spec, random_specs
from qhistories import (
    HistoryOperator,
    HistorySpec,
    MultitimeProjector,
    PostselectionError,
    ValidationError,
    build_history_vector,
    history_expectation,
    local_nonbasis_probability,
    multitime_average,
    multitime_probability,
    nonbasis_report,
    sequence_probability,
    two_time_intermediate_state,
)
from qhistories.inequalities import precession_schedule
from qhistories.observables import born_local_probability, sample_histories, sampled_average
from qhistories.states import X, Z, pauli_x, pauli_z, xz_observable

R2 = 1 / np.sqrt(2)
PLUS = np.array([1, 1]) * R2


def zz_correlated():
    return build_history_vector(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_z()] * 2))


def anticorrelated():
    psi = np.array([-1, 1]) * R2
    return build_history_vector(HistorySpec(psi, [np.eye(2), X], [pauli_z()] * 2))


def test_multitime_probability_examples():
    assert multitime_probability(zz_correlated(), MultitimeProjector({1: [1, 0]})) == pytest.approx(0.5, abs=1e-14)
    p = multitime_probability(anticorrelated(), MultitimeProjector({1: PLUS, 2: [1, 0]}))
    assert p == pytest.approx(0.25, abs=1e-14)


@pytest.mark.parametrize("spec", random_specs(10, 21, lengths=(2, 3)))
def test_full_placement_reproduces_sequence_probability(spec):
    hv = build_history_vector(spec)
    for a in spec.outcomes():
        proj = MultitimeProjector.for_outcomes(hv, {k + 1: ak for k, ak in enumerate(a)})
        assert multitime_probability(hv, proj) == pytest.approx(sequence_probability(spec, a), abs=1e-12)


def test_partial_placement_sums_fixed_outcomes_and_completes():
    spec = random_spec(3, 3, np.random.default_rng(22))
    hv = build_history_vector(spec)
    total = 0.0
    for a1 in range(3):
        for a3 in range(3):
            p = multitime_probability(hv, MultitimeProjector.for_outcomes(hv, {1: a1, 3: a3}))
            direct = sum(sequence_probability(spec, (a1, b, a3)) for b in range(3))
            assert p == pytest.approx(direct, abs=1e-12)
            total += p
    assert total == pytest.approx(1, abs=1e-10)


def test_projector_dimension_mismatch():
    with pytest.raises(ValidationError, match="dim"):
        multitime_probability(zz_correlated(), MultitimeProjector({1: [1, 0, 0]}))
    with pytest.raises(ValidationError, match="slot"):
        multitime_probability(zz_correlated(), MultitimeProjector({3: [1, 0]}))


def test_multitime_average_examples():
    assert multitime_average(anticorrelated(), [1, 2]) == pytest.approx(-1, abs=1e-14)
    assert multitime_average(zz_correlated(), [1, 2]) == pytest.approx(1, abs=1e-14)
    hv = build_history_vector(precession_schedule(np.pi / 3).spec())
    assert multitime_average(hv, [1, 2]) == pytest.approx(0.5, abs=1e-12)


def test_history_expectation_examples():
    hv = anticorrelated()
    a2 = xz_observable(-3 * np.pi / 4).operator()
    b2 = xz_observable(-np.pi / 4).operator()
    np.testing.assert_allclose(a2, -(Z + X) * R2, atol=1e-15)
    assert history_expectation(hv, HistoryOperator.product({1: X, 2: a2})) == pytest.approx(R2, abs=1e-14)
    assert history_expectation(hv, HistoryOperator.product({1: Z, 2: b2})) == pytest.approx(-R2, abs=1e-14)
    assert history_expectation(hv, HistoryOperator.product({})) == pytest.approx(1, abs=1e-14)


def test_history_expectation_rejects_non_hermitian():
    op = HistoryOperator.product({1: np.array([[0, 1], [0, 0]])})
    with pytest.raises(ValidationError, match="Hermitian"):
        history_expectation(zz_correlated(), op)
    xx_product = build_history_vector(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_x()] * 2))
    assert history_expectation(xx_product, op, observable=False) == pytest.approx(0.5, abs=1e-14)


def test_operator_algebra():
    op = HistoryOperator.product({1: Z}) + 2 * HistoryOperator.product({2: X})
    dense = op.dense([2, 2])
    np.testing.assert_allclose(dense, np.kron(Z, np.eye(2)) + 2 * np.kron(np.eye(2), X))
    assert op.is_hermitian([2, 2])


@pytest.mark.parametrize("spec", random_specs(10, 23, dims=(2, 3), lengths=(2, 3)))
def test_average_matches_diagonal_operator(spec):
    hv = build_history_vector(spec)
    slots = list(range(1, spec.n + 1))
    diag = HistoryOperator.diagonal({k: spec.measurements[k - 1] for k in slots})
    assert multitime_average(hv, slots) == pytest.approx(history_expectation(hv, diag), abs=1e-12)


def test_local_nonbasis_examples():
    rng = np.random.default_rng(24)
    spec = random_spec(3, 3, rng)
    b = random_observable(3, rng)
    beta = 1
    direct = abs(np.vdot(b.vector(beta), spec.evolutions[0] @ spec.initial_state)) ** 2
    assert local_nonbasis_probability(spec, 1, b, beta) == pytest.approx(direct, abs=1e-14)
    xz = HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_z()] * 2)
    assert local_nonbasis_probability(xz, 2, pauli_x(), 0) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("spec", random_specs(10, 25, dims=(2, 3), lengths=(2, 3)))
def test_local_nonbasis_completeness_and_own_observable(spec):
    rng = np.random.default_rng(spec.n * 10 + spec.dim)
    b = random_observable(spec.dim, rng)
    for slot in range(1, spec.n + 1):
        ps = [local_nonbasis_probability(spec, slot, b, k) for k in range(spec.dim)]
        assert sum(ps) == pytest.approx(1, abs=1e-12)
        own = spec.measurements[slot - 1]
        for k in range(spec.dim):
            marg = sum(sequence_probability(spec, a) for a in spec.outcomes() if a[slot - 1] == k)
            assert local_nonbasis_probability(spec, slot, own, k) == pytest.approx(marg, abs=1e-12)


def test_formal_and_operational_values():
    rng = np.random.default_rng(26)
    spec = random_spec(2, 3, rng)
    b = random_observable(2, rng)
    last = nonbasis_report(spec, 3, b)
    assert last.label == "FORMAL"
    assert last.max_gap < 1e-12
    early = nonbasis_report(spec, 1, b)
    assert early.max_gap > 1e-3
    # earlier slots: the formal value is "measure the slot observable, then b"
    hv = build_history_vector(spec)
    a1 = spec.measurements[0]
    for k in range(2):
        two_step = sum(sequence_probability(spec.replace(measurements=[a1, a1, a1]), (a,) + r)
                       * abs(np.vdot(b.vector(k), a1.vector(a))) ** 2
                       for a in range(2) for r in [(0, 0), (0, 1), (1, 0), (1, 1)])
        assert born_local_probability(hv, 1, b.vector(k)) == pytest.approx(two_step, abs=1e-12)


def test_intermediate_state_base_example():
    psi = np.array([-1, 1]) * R2
    spec = HistorySpec(psi, [np.eye(2), X], [pauli_z()] * 2)
    st = two_time_intermediate_state(spec, pauli_z(), 0)
    assert st.normalization == pytest.approx(0.5, abs=1e-14)
    assert abs(abs(st.state[1]) - 1) < 1e-14
    assert abs(st.state[0]) < 1e-14
    assert st.weights.sum() == pytest.approx(1, abs=1e-12)


def test_intermediate_state_identity_and_errors():
    rng = np.random.default_rng(27)
    for spec in random_specs(20, 27, dims=(2,), lengths=(2,)):
        b2 = random_observable(2, rng)
        hv = build_history_vector(spec.replace(measurements=[spec.measurements[0], b2]))
        for beta2 in range(2):
            st = two_time_intermediate_state(spec, b2, beta2)
            assert np.linalg.norm(st.state) == pytest.approx(1, abs=1e-12)
            assert np.all(st.weights >= 0)
            assert st.weights.sum() == pytest.approx(1, abs=1e-12)
            for beta1 in range(2):
                born = multitime_probability(hv, MultitimeProjector.for_outcomes(hv, {1: beta1, 2: beta2}))
                assert born == pytest.approx(st.normalization * st.probability(hv.bases[0][:, beta1]), abs=1e-12)
    zero = HistorySpec([1, 0], [np.eye(2)] * 2, [pauli_z()] * 2)
    with pytest.raises(PostselectionError):
        two_time_intermediate_state(zero, pauli_z(), 1)
    with pytest.raises(ValidationError):
        two_time_intermediate_state(random_spec(2, 3, rng), pauli_z(), 0)


def test_sampling_is_seeded_and_close():
    hv = build_history_vector(precession_schedule(np.pi / 3).spec())
    assert sample_histories(hv, 1000, seed=5) == sample_histories(hv, 1000, seed=5)
    assert sampled_average(hv, [1, 2], 20000, seed=1) == pytest.approx(0.5, abs=0.03)
