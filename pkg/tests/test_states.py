import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weaktomo.errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidStateError,
    SingularPostSelectionError,
)
from weaktomo.linalg import make_generator_basis
from weaktomo.states import (
    PostSelection,
    PureState,
    RngSeed,
    SimplexWeights,
    density_from_state,
    fourier_mub,
    is_unbiased,
    phase_fix,
    sample_haar_amplitudes,
    sample_haar_state,
    state_distance,
)

from conftest import random_state


def test_pure_state_requires_normalization():
    with pytest.raises(InvalidStateError):
        PureState([1, 1])
    with pytest.raises(InvalidDimensionError):
        PureState([1])


def test_postselection_rejects_zero_component():
    with pytest.raises(SingularPostSelectionError):
        PostSelection([1, 0])


def test_simplex_weights():
    assert np.allclose(SimplexWeights.uniform(4).p, 0.25)
    with pytest.raises(InvalidStateError):
        SimplexWeights([0.5, 0.6])
    assert not SimplexWeights([1.0, 0.0]).is_interior()


def test_qubit_expectations():
    rho = density_from_state(PureState([1, 0]))
    np.testing.assert_allclose(rho.mat, np.diag([1, 0]))
    np.testing.assert_allclose(rho.bloch, [0, 0, 0.5], atol=1e-15)
    plus = density_from_state(PureState(np.array([1, 1]) / np.sqrt(2)))
    np.testing.assert_allclose(plus.bloch, [0.5, 0, 0], atol=1e-15)


def test_qutrit_diagonal_expectations():
    rho = density_from_state(PureState([1, 0, 0]))
    # the two diagonal generators come last
    np.testing.assert_allclose(rho.bloch[-2:], [0.5, 1 / (2 * np.sqrt(3))], atol=1e-15)
    np.testing.assert_allclose(rho.bloch[:-2], 0, atol=1e-15)


@pytest.mark.parametrize("n", range(2, 7))
def test_density_expansion(n, rng):
    basis = make_generator_basis(n)
    rho = density_from_state(random_state(n, rng), basis)
    assert abs(np.trace(rho.mat) - 1) <= 1e-12
    assert np.max(np.abs(rho.mat - rho.mat.conj().T)) <= 1e-12
    assert abs(rho.purity() - 1) <= 1e-10
    np.testing.assert_allclose(basis.synthesize(rho.bloch), rho.mat, atol=1e-10)


def test_fourier_mub_examples():
    np.testing.assert_allclose(fourier_mub(2, 0).amps, np.ones(2) / np.sqrt(2))
    np.testing.assert_allclose(fourier_mub(3, 0).weights.p, np.full(3, 1 / 3))
    om = np.exp(2j * np.pi / 3)
    np.testing.assert_allclose(fourier_mub(3, 1).amps, np.array([1, om, om**2]) / np.sqrt(3), atol=1e-15)
    with pytest.raises(ValueError):
        fourier_mub(3, 3)


@pytest.mark.parametrize("n", range(2, 9))
def test_fourier_family_unbiased(n):
    assert all(is_unbiased(fourier_mub(n, k), 1e-12) for k in range(n))


def test_is_unbiased_examples():
    assert is_unbiased(fourier_mub(3, 1), 1e-12)
    assert not is_unbiased(PostSelection([np.sqrt(0.9), np.sqrt(0.1)]))
    assert is_unbiased(PostSelection(np.ones(4) / 2))


@pytest.mark.parametrize("n", [2, 4])
def test_haar_first_moment(n):
    amps = sample_haar_amplitudes(n, 10**6, RngSeed(7))
    p = np.abs(amps) ** 2
    sem = p.std(axis=0) / np.sqrt(p.shape[0])
    assert np.all(np.abs(p.mean(axis=0) - 1 / n) <= 3 * sem + 1e-12)


def test_haar_determinism():
    a = sample_haar_state(3, RngSeed(11, 2))
    b = sample_haar_state(3, RngSeed(11, 2))
    c = sample_haar_state(3, RngSeed(11, 3))
    np.testing.assert_array_equal(a.amps, b.amps)
    assert not np.array_equal(a.amps, c.amps)


def test_phase_fix_examples():
    np.testing.assert_allclose(phase_fix(PureState([1j, 0])).amps, [1, 0])
    np.testing.assert_allclose(phase_fix(PureState([0, np.exp(1j * np.pi / 3)])).amps, [0, 1], atol=1e-15)


def test_state_distance_examples(rng):
    psi = random_state(3, rng)
    assert state_distance(psi, PureState(np.exp(0.7j) * psi.amps)) < 1e-15
    assert abs(state_distance(PureState([1, 0]), PureState([0, 1])) - 1) < 1e-15
    assert abs(state_distance(PureState([1, 0]), PureState(np.ones(2) / np.sqrt(2))) - 1 / np.sqrt(2)) < 1e-15
    with pytest.raises(DimensionMismatchError):
        state_distance(PureState([1, 0]), PureState([1, 0, 0]))


def test_state_distance_resolves_tiny_separations():
    # 1 - |<a|b>|^2 would round to zero here
    eps = 1e-10
    a = PureState([1, 0])
    b = PureState([np.cos(eps), np.sin(eps)])
    assert abs(state_distance(a, b) - np.sin(eps)) < 1e-20


@st.composite
def states(draw, n=3):
    re = draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n))
    im = draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n))
    z = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(z) < 1e-3:
        z[0] = 1
    return PureState.from_unnormalized(z)


@given(states(), st.floats(0, 2 * np.pi))
@settings(max_examples=200)
def test_phase_fix_properties(psi, theta):
    fixed = phase_fix(psi)
    np.testing.assert_allclose(phase_fix(fixed).amps, fixed.amps, atol=1e-15)
    rotated = phase_fix(PureState.from_unnormalized(np.exp(1j * theta) * psi.amps))
    np.testing.assert_allclose(rotated.amps, fixed.amps, atol=1e-12)


@given(states(), states())
@settings(max_examples=200)
def test_state_distance_symmetric(a, b):
    assert abs(state_distance(a, b) - state_distance(b, a)) <= 1e-12
    # the distance minimizes over the relative phase, so any alignment bounds it
    gap = np.linalg.norm(phase_fix(a).amps - phase_fix(b).amps)
    assert state_distance(a, b) <= gap + 1e-12
    assert state_distance(a, a) < 1e-15
