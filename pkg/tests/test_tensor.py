import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhistories.tensor import (
    LabeledSpace,
    check_hermitian,
    check_unitary,
    hermitian_eig,
    is_orthonormal,
    ket,
    partial_trace,
    permute_axes,
    projector,
    random_state,
    random_unitary,
    tensor_all,
    tensor_product,
)


def loop_partial_trace(rho, dims, traced):
    """Oracle: explicit index loops over every basis element."""
    n = len(dims)
    keep = [k for k in range(n) if k not in traced]
    kdims = [dims[k] for k in keep]
    dk = int(np.prod(kdims)) if keep else 1
    out = np.zeros((dk, dk), dtype=complex)
    strides = [int(np.prod(dims[k + 1:])) for k in range(n)]
    for row in itertools.product(*(range(d) for d in dims)):
        for col in itertools.product(*(range(d) for d in dims)):
            if any(row[k] != col[k] for k in traced):
                continue
            r = sum(row[k] * strides[k] for k in range(n))
            c = sum(col[k] * strides[k] for k in range(n))
            rk = np.ravel_multi_index([row[k] for k in keep], kdims) if keep else 0
            ck = np.ravel_multi_index([col[k] for k in keep], kdims) if keep else 0
            out[rk, ck] += rho[r, c]
    return out


def random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2, 2), (2, 2, 2)])
def test_partial_trace_matches_index_loops(dims):
    rng = np.random.default_rng(sum(dims))
    space = LabeledSpace(tuple((f"x{k}", d) for k, d in enumerate(dims)))
    rho = random_density(space.dim, rng)
    for r in range(1, len(dims) + 1):
        for traced in itertools.combinations(range(len(dims)), r):
            got = partial_trace(rho, space, [f"x{k}" for k in traced])
            np.testing.assert_allclose(got, loop_partial_trace(rho, dims, traced), atol=1e-13)


def test_partial_trace_of_everything_is_trace():
    space = LabeledSpace.time_slots(2, 2)
    rho = random_density(4, np.random.default_rng(0))
    out = partial_trace(rho, space, space.labels)
    assert out.shape == (1, 1)
    assert out[0, 0] == pytest.approx(1.0, abs=1e-14)


def test_partial_trace_of_product_state():
    a, b = projector([1, 0]), projector(np.array([1, 1]) / np.sqrt(2))
    space = LabeledSpace.of(("A", 2), ("B", 2))
    np.testing.assert_allclose(partial_trace(np.kron(a, b), space, ["B"]), a, atol=1e-15)
    np.testing.assert_allclose(partial_trace(np.kron(a, b), space, ["A"]), b, atol=1e-15)


def test_partial_trace_rejects_unknown_label_and_size():
    space = LabeledSpace.time_slots(2, 2)
    with pytest.raises(KeyError):
        partial_trace(np.eye(4) / 4, space, ["t3"])
    with pytest.raises(ValueError):
        partial_trace(np.eye(3) / 3, space, ["t1"])


complex_entries = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(complex_entries, min_size=16, max_size=16),
       st.lists(complex_entries, min_size=16, max_size=16),
       complex_entries)
def test_partial_trace_is_linear(xs, ys, c):
    space = LabeledSpace.of(("A", 2), ("B", 2))
    x = np.array(xs).reshape(4, 4)
    y = np.array(ys).reshape(4, 4)
    lhs = partial_trace(x + c * y, space, ["B"])
    rhs = partial_trace(x, space, ["B"]) + c * partial_trace(y, space, ["B"])
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + abs(c)) * 100)


@settings(max_examples=60, deadline=None)
@given(st.lists(complex_entries, min_size=2, max_size=2),
       st.lists(complex_entries, min_size=3, max_size=3),
       st.lists(complex_entries, min_size=2, max_size=2),
       complex_entries)
def test_tensor_product_is_bilinear(a, b, a2, c):
    a, b, a2 = (np.array(v) for v in (a, b, a2))
    lhs = tensor_product(a + c * a2, b)
    rhs = tensor_product(a, b) + c * tensor_product(a2, b)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * 1000)


def test_tensor_product_ordering_and_kind():
    np.testing.assert_array_equal(tensor_product(ket(1, 2), ket(0, 3)), ket(3, 6))
    with pytest.raises(ValueError):
        tensor_product(ket(0, 2), np.eye(2))
    np.testing.assert_array_equal(tensor_all([ket(1, 2), ket(1, 2), ket(0, 2)]), ket(6, 8))


def test_labeled_space_basics():
    s = LabeledSpace.time_slots(3, 2) + LabeledSpace.of(("t3.A", 2))
    assert s.labels == ("t1", "t2", "t3.A")
    assert s.dims == (3, 3, 2)
    assert s.dim == 18
    assert s.index("t2") == 1
    assert s.without(["t1"]).labels == ("t2", "t3.A")
    with pytest.raises(KeyError):
        s.index("t9")
    with pytest.raises(ValueError):
        LabeledSpace.of(("a", 2), ("a", 2))
    with pytest.raises(ValueError):
        LabeledSpace.of(("a", 0))


def test_permute_axes_moves_factors():
    space = LabeledSpace.of(("A", 2), ("B", 3))
    v = tensor_product(ket(1, 2), ket(2, 3))
    w, s2 = permute_axes(v, space, ["B", "A"])
    assert s2.labels == ("B", "A")
    np.testing.assert_array_equal(w, tensor_product(ket(2, 3), ket(1, 2)))
    with pytest.raises(ValueError):
        permute_axes(v, space, ["A", "A"])


def test_validation_helpers():
    rng = np.random.default_rng(3)
    u = random_unitary(4, rng)
    assert check_unitary(u, 1e-12)
    assert not check_unitary(np.diag([1, 2]))
    assert check_hermitian(u + u.conj().T)
    assert not check_hermitian(np.array([[0, 1], [0, 0]]))
    assert is_orthonormal(list(u.T))
    assert abs(np.linalg.norm(random_state(5, rng)) - 1) < 1e-14


def test_hermitian_eig_ascending_and_rejects():
    m = np.array([[2, 1j], [-1j, 2]])
    w, v = hermitian_eig(m)
    np.testing.assert_allclose(w, [1, 3], atol=1e-14)
    np.testing.assert_allclose(m @ v, v * w, atol=1e-14)
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))
