import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from isodist.errors import InvalidStateError, NotIsospectralError, RankAmbiguityError
from isodist.states import (
    Spectrum,
    block_projectors,
    canonical_purification,
    check_density,
    dagger,
    haar_unitary,
    is_isospectral,
    matrix_P,
    random_isospectral,
    spectrum_of,
    trace_distance,
)


def test_spectrum_rejects_bad_values():
    with pytest.raises(InvalidStateError):
        Spectrum((0.3, 0.7))
    with pytest.raises(InvalidStateError):
        Spectrum((0.7, 0.2))
    with pytest.raises(InvalidStateError):
        Spectrum((1.0, 0.0))


def test_spectrum_multiplicities():
    s = Spectrum((0.5, 0.25, 0.25))
    assert s.k == 3
    assert [(b.start, b.stop) for b in s.blocks] == [(0, 1), (1, 3)]
    assert list(s.block_labels()) == [0, 1, 1]


def test_spectrum_of_diagonal():
    assert spectrum_of(np.diag([0.7, 0.3])).values == pytest.approx((0.7, 0.3))


def test_spectrum_of_drops_zero_eigenvalue():
    s = spectrum_of(np.diag([0.5, 0.5, 0.0]), rank_tol=1e-10)
    assert s.k == 2
    assert_allclose(s.p, [0.5, 0.5])


def test_spectrum_of_conjugated(rng):
    u = haar_unitary(2, rng)
    s = spectrum_of(u @ np.diag([0.6, 0.4]) @ dagger(u))
    assert_allclose(s.p, [0.6, 0.4], atol=1e-12)


def test_spectrum_of_ambiguous_rank():
    with pytest.raises(RankAmbiguityError):
        spectrum_of(np.diag([1 - 1.5e-10, 1.5e-10]), rank_tol=1e-10)


def test_check_density_rejects():
    with pytest.raises(InvalidStateError):
        check_density(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(InvalidStateError):
        check_density(np.diag([0.6, 0.6]))
    with pytest.raises(InvalidStateError):
        check_density(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidStateError):
        check_density(np.ones((2, 3)) / 4)


@pytest.mark.parametrize(
    "values, expected",
    [((0.7, 0.3), np.diag([0.7, 0.3])), ((1.0,), np.eye(1)), ((0.5, 0.25, 0.25), np.diag([0.5, 0.25, 0.25]))],
)
def test_matrix_P(values, expected):
    assert_allclose(matrix_P(Spectrum(values)), expected)


@pytest.mark.parametrize(
    "values, expected",
    [
        ((0.7, 0.3), [np.diag([1.0, 0]), np.diag([0, 1.0])]),
        ((0.5, 0.25, 0.25), [np.diag([1.0, 0, 0]), np.diag([0, 1.0, 1])]),
        ((1 / 3, 1 / 3, 1 / 3), [np.eye(3)]),
    ],
)
def test_block_projectors(values, expected):
    got = block_projectors(Spectrum(values))
    assert len(got) == len(expected)
    for a, b in zip(got, expected):
        assert_allclose(a, b)


def test_canonical_purification_diagonal():
    s = Spectrum((0.7, 0.3))
    assert_allclose(canonical_purification(np.diag([0.7, 0.3]), s), np.diag(np.sqrt([0.7, 0.3])), atol=1e-15)


def test_canonical_purification_degenerate_block():
    s = Spectrum((0.5, 0.5))
    psi = canonical_purification(np.diag([0.5, 0.5]), s)
    assert_allclose(psi @ dagger(psi), np.diag([0.5, 0.5]), atol=1e-14)
    assert_allclose(dagger(psi) @ psi, matrix_P(s), atol=1e-14)


def test_canonical_purification_rejects_other_spectrum():
    with pytest.raises(NotIsospectralError):
        canonical_purification(np.diag([0.6, 0.4]), Spectrum((0.7, 0.3)))


def test_random_isospectral_pure_and_deterministic():
    rho = random_isospectral(Spectrum((1.0,)), 2, 7)
    assert_allclose(rho @ rho, rho, atol=1e-14)
    assert_allclose(np.trace(rho), 1.0)
    assert_allclose(random_isospectral(Spectrum((0.7, 0.3)), 3, 5), random_isospectral(Spectrum((0.7, 0.3)), 3, 5))


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 5))
def test_random_isospectral_has_spectrum(seed, n):
    s = Spectrum((0.5, 0.3, 0.2))
    rho = random_isospectral(s, n, seed)
    assert is_isospectral(rho, s)
    psi = canonical_purification(rho, s)
    assert_allclose(psi @ dagger(psi), rho, atol=1e-12)
    assert_allclose(dagger(psi) @ psi, matrix_P(s), atol=1e-12)


def test_trace_distance_examples():
    a = np.diag([0.7, 0.3])
    assert trace_distance(a, a) == 0
    assert trace_distance(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(1.0)
    assert trace_distance(a, np.diag([0.3, 0.7])) == pytest.approx(0.4)


@given(seed=st.integers(0, 2**32 - 1))
def test_trace_distance_triangle(seed):
    s = Spectrum((0.6, 0.4))
    a, b, c = (random_isospectral(s, 2, seed + i) for i in range(3))
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12
