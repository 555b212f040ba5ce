import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weaktomo.errors import DimensionMismatchError, InvalidDimensionError
from weaktomo.linalg import inner, is_hermitian, make_generator_basis, outer


@pytest.mark.parametrize("n", range(2, 7))
def test_generator_normalization(n):
    gens = make_generator_basis(n).generators
    assert gens.shape == (n * n - 1, n, n)
    gram = np.einsum("ijk,lkj->il", gens, gens)
    assert np.max(np.abs(gram - 2 * np.eye(n * n - 1))) <= 1e-12
    assert np.max(np.abs(np.trace(gens, axis1=1, axis2=2))) <= 1e-12
    assert all(is_hermitian(g) for g in gens)


def test_qubit_generators_are_pauli():
    gens = make_generator_basis(2).generators
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1, -1])
    for g, s in zip(gens, (sx, sy, sz)):
        np.testing.assert_allclose(g, s, atol=1e-15)


def test_qutrit_has_eight():
    assert len(make_generator_basis(3).generators) == 8


def test_bad_dimension():
    with pytest.raises(InvalidDimensionError):
        make_generator_basis(1)


def test_synthesize_inverts_expectations(rng):
    basis = make_generator_basis(4)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    z /= np.linalg.norm(z)
    rho = outer(z, z)
    np.testing.assert_allclose(basis.synthesize(basis.expectations(rho)), rho, atol=1e-12)


def test_inner_examples():
    assert inner([1, 0], [1, 0]) == 1
    assert inner([1, 0], [0, 1]) == 0
    assert abs(inner(np.array([1, 1j]) / np.sqrt(2), [1, 0]) - 1 / np.sqrt(2)) < 1e-15


def test_outer_examples():
    np.testing.assert_array_equal(outer([1, 0], [1, 0]), np.diag([1, 0]))
    np.testing.assert_array_equal(outer([0, 1], [1, 0]), [[0, 0], [1, 0]])
    a = np.array([1 + 2j, 3 - 1j])
    assert abs(np.trace(outer(a, a)) - np.vdot(a, a)) < 1e-12


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner([1, 0], [1, 0, 0])
    with pytest.raises(DimensionMismatchError):
        outer([1, 0], [1, 0, 0])


complex_vec = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                       min_size=3, max_size=3)


@given(complex_vec, complex_vec)
@settings(max_examples=200)
def test_inner_hermitian_symmetry(a, b):
    assert abs(inner(a, b) - np.conj(inner(b, a))) <= 1e-9 * (1 + abs(inner(a, b)))
