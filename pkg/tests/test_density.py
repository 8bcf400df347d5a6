import numpy as np
import pytest

from _gen import random_observable, random_spec, random_specs
from qhistories import (
    CompositeHistorySpec,
    HistoryDensityMatrix,
    HistoryEnsemble,
    HistorySpec,
    MultitimeProjector,
    ValidationError,
    build_history_vector,
    density_from_ensemble,
    history_product,
    is_product_history,
    probability_from_density,
    pure_density,
    schmidt_spectrum,
    sequence_probability,
    space_reduce,
    time_reduce,
    von_neumann_entropy,
)
from qhistories.density import slot_of, space_reduce_density
from qhistories.states import CNOT, H, X, pauli_x, pauli_z
from qhistories.tensor import LabeledSpace, random_state, random_unitary

R2 = 1 / np.sqrt(2)
PLUS = np.array([1, 1]) * R2


def xx_product():
    return build_history_vector(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_x()] * 2))


def zz_correlated():
    return build_history_vector(HistorySpec(PLUS, [np.eye(2)] * 2, [pauli_z()] * 2))


def anticorrelated():
    return build_history_vector(HistorySpec(np.array([-1, 1]) * R2, [np.eye(2), X], [pauli_z()] * 2))


def test_density_validation():
    space = LabeledSpace.time_slots(2, 1)
    with pytest.raises(ValidationError, match="Hermitian"):
        HistoryDensityMatrix(space, [[0.5, 1], [0, 0.5]])
    with pytest.raises(ValidationError, match="trace"):
        HistoryDensityMatrix(space, np.eye(2))
    with pytest.raises(ValidationError, match="negative"):
        HistoryDensityMatrix(space, np.diag([1.5, -0.5]))
    with pytest.raises(ValidationError, match="dim"):
        HistoryDensityMatrix(space, np.eye(3) / 3)


def test_slot_of():
    assert slot_of("t3") == 3
    assert slot_of("t12.B") == 12
    with pytest.raises(ValidationError):
        slot_of("A")


def test_ensembles():
    single = density_from_ensemble(HistoryEnsemble(((1.0, zz_correlated()),)))
    assert single.purity() == pytest.approx(1, abs=1e-10)
    assert np.linalg.matrix_rank(single.matrix, tol=1e-10) == 1
    mixed = density_from_ensemble(HistoryEnsemble(((0.5, xx_product()), (0.5, zz_correlated()))))
    assert mixed.purity() < 1 - 1e-3
    with pytest.raises(ValidationError, match="empty"):
        HistoryEnsemble(())
    with pytest.raises(ValidationError, match="sum"):
        HistoryEnsemble(((0.5, zz_correlated()),))
    with pytest.raises(ValidationError, match="nonnegative"):
        HistoryEnsemble(((1.5, zz_correlated()), (-0.5, xx_product())))


def test_probability_from_density():
    rho = pure_density(zz_correlated())
    hv = zz_correlated()
    assert probability_from_density(rho, MultitimeProjector.for_outcomes(hv, {1: 0, 2: 0})) == pytest.approx(0.5)
    assert probability_from_density(rho, MultitimeProjector.for_outcomes(hv, {1: 0, 2: 1})) == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValidationError, match="cover"):
        probability_from_density(rho, MultitimeProjector({1: [1, 0]}))


def test_mixed_probability_is_linear():
    rng = np.random.default_rng(31)
    s1, s2 = random_spec(2, 2, rng), random_spec(2, 2, rng)
    s2 = s2.replace(measurements=s1.measurements)
    h1, h2 = build_history_vector(s1), build_history_vector(s2)
    rho = density_from_ensemble(HistoryEnsemble(((0.3, h1), (0.7, h2))))
    for a in s1.outcomes():
        proj = MultitimeProjector.for_outcomes(h1, dict(enumerate(a, start=1)))
        expect = 0.3 * h1.probability(a) + 0.7 * h2.probability(a)
        assert probability_from_density(rho, proj) == pytest.approx(expect, abs=1e-12)


def test_time_reduce_examples():
    red = time_reduce(pure_density(anticorrelated()), [1])
    np.testing.assert_allclose(red.matrix, np.eye(2) / 2, atol=1e-15)
    assert von_neumann_entropy(red) == pytest.approx(np.log(2), abs=1e-10)
    prod = time_reduce(pure_density(xx_product()), [2])
    assert prod.purity() == pytest.approx(1, abs=1e-12)
    full = pure_density(zz_correlated())
    assert time_reduce(full, [1, 2]) is full
    with pytest.raises(ValidationError, match="unknown"):
        time_reduce(full, [3])


def test_entropy_values_and_bases():
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(np.log(2), abs=1e-14)
    assert von_neumann_entropy(np.eye(2) / 2, base=2) == pytest.approx(1, abs=1e-14)
    assert abs(von_neumann_entropy(pure_density(anticorrelated()))) < 1e-10
    with pytest.raises(ValueError):
        von_neumann_entropy(np.eye(2) / 2, base=10)


def test_entropy_is_unitarily_invariant():
    rng = np.random.default_rng(32)
    spec = random_spec(2, 3, rng)
    rho = time_reduce(pure_density(build_history_vector(spec)), [1, 2])
    u = random_unitary(4, rng)
    assert von_neumann_entropy(u @ rho.matrix @ u.conj().T) == pytest.approx(von_neumann_entropy(rho), abs=1e-10)


def test_schmidt_examples():
    np.testing.assert_allclose(is_product_history(xx_product(), [1]).singular_values, [1, 0], atol=1e-14)
    assert is_product_history(xx_product(), [1]).is_product
    s45 = schmidt_spectrum(anticorrelated().dense(), anticorrelated().space, ["t1"])
    np.testing.assert_allclose(s45, [R2, R2], atol=1e-14)
    assert not is_product_history(anticorrelated(), [1]).is_product
    with pytest.raises(ValidationError):
        schmidt_spectrum(anticorrelated().dense(), anticorrelated().space, [1, 2])


def test_product_of_random_histories_factorizes():
    rng = np.random.default_rng(33)
    ha = build_history_vector(random_spec(2, 2, rng))
    hb = build_history_vector(random_spec(2, 2, rng))
    prod = history_product(ha, hb)
    assert prod.space.labels == ("t1.A", "t1.B", "t2.A", "t2.B")
    assert is_product_history(prod, ["t1.A", "t2.A"], tol=1e-10).is_product
    rho_a = space_reduce_density(pure_density(prod), "A")
    assert von_neumann_entropy(rho_a) < 1e-8


def composite(seed, dim_a=2, dim_b=2, n=2):
    rng = np.random.default_rng(seed)
    d = dim_a * dim_b
    return CompositeHistorySpec(
        dim_a, dim_b, random_state(d, rng), [random_unitary(d, rng) for _ in range(n)],
        [random_observable(dim_a, rng) for _ in range(n)], [random_observable(dim_b, rng) for _ in range(n)])


def test_composite_joint_labels_and_split():
    c = CompositeHistorySpec(2, 3, np.eye(6)[0], [np.eye(6)], [pauli_z()], [random_observable(3, np.random.default_rng(0))])
    assert c.split(5) == (1, 2)
    assert c.joint.measurements[0].eigenvalues.tolist() == [0, 1, 2, -0, -1, -2]
    assert c.space().labels == ("t1.A", "t1.B")
    with pytest.raises(ValidationError, match="measurements_a"):
        CompositeHistorySpec(3, 2, np.eye(6)[0], [np.eye(6)], [pauli_z()], [pauli_z()])
    with pytest.raises(ValidationError, match="B-measurements"):
        CompositeHistorySpec(2, 2, np.eye(4)[0], [np.eye(4)], [pauli_z()], [])


def test_maximally_correlated_pair_has_entropy():
    bell = CNOT @ np.kron(H, np.eye(2))
    c = CompositeHistorySpec(2, 2, [1, 0, 0, 0], [bell], [pauli_z()], [pauli_z()])
    assert von_neumann_entropy(space_reduce(c, "A")) == pytest.approx(np.log(2), abs=1e-12)


def test_alice_marginals_from_space_reduction():
    c = composite(34, 2, 3)
    rho_a = space_reduce(c, "A")
    for a in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        lhs = probability_from_density(rho_a, c.side_projector("A", a))
        rhs = sum(sequence_probability(c.joint, (a[0] * 3 + b1, a[1] * 3 + b2))
                  for b1 in range(3) for b2 in range(3))
        assert lhs == pytest.approx(rhs, abs=1e-12)
    with pytest.raises(ValidationError):
        space_reduce(c, "C")


def test_reductions_commute_and_schmidt_symmetry():
    c = composite(35, 2, 2, 3)
    rho = pure_density(c.history_vector())
    a_then_t = time_reduce(space_reduce_density(rho, "A"), [1, 3])
    t_then_a = space_reduce_density(time_reduce(rho, [1, 3]), "A")
    np.testing.assert_allclose(a_then_t.matrix, t_then_a.matrix, atol=1e-12)
    assert von_neumann_entropy(space_reduce_density(rho, "A")) == pytest.approx(
        von_neumann_entropy(space_reduce_density(rho, "B")), abs=1e-9)


@pytest.mark.parametrize("spec", random_specs(10, 36, dims=(2, 3), lengths=(2, 3)))
def test_pure_entropy_and_cut_symmetry(spec):
    rho = pure_density(build_history_vector(spec))
    assert abs(von_neumann_entropy(rho)) < 1e-9
    left = von_neumann_entropy(time_reduce(rho, [1]))
    right = von_neumann_entropy(time_reduce(rho, list(range(2, spec.n + 1))))
    assert left == pytest.approx(right, abs=1e-9)
