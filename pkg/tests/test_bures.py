import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from isodist.bures import (
    QubitExample,
    bures_distance,
    compare_distances,
    dittmann_closed_form,
    dittmann_form,
    fidelity,
    qubit_example,
)
from isodist.checks import dittmann_ratio_errors, random_hermitian
from isodist.dynamics import curve_length
from isodist.errors import InvalidStateError
from isodist.geodesics import OptimizerConfig, horizontality_residual
from isodist.states import Spectrum, dagger, haar_unitary, random_isospectral

FAST = OptimizerConfig(n_max=64, n_starts=4)
SWAP_PAIR = (np.diag([0.7, 0.3]), np.diag([0.3, 0.7]))


def _qubit_root_fidelity(a, b):
    # independent 2x2 oracle: sqrt(F) = sqrt(tr(a b) + 2 sqrt(det a det b))
    return np.sqrt(np.trace(a @ b).real + 2 * np.sqrt(np.linalg.det(a).real * np.linalg.det(b).real))


def test_fidelity_examples():
    rho = random_isospectral(Spectrum((0.6, 0.4)), 2, 0)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(np.diag([1.0, 0]), np.diag([0, 1.0])) == pytest.approx(0.0, abs=1e-15)
    assert fidelity(*SWAP_PAIR) == pytest.approx((2 * np.sqrt(0.21)) ** 2, abs=1e-14)


def test_bures_commuting_pair():
    expected = np.sqrt(2 - 2 * np.sqrt(0.84))
    assert bures_distance(*SWAP_PAIR) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(0.408620, abs=1e-6)


def test_bures_identical_states_exactly_zero(rng):
    rho = random_isospectral(Spectrum((0.5, 0.3, 0.2)), 3, rng)
    assert bures_distance(rho, rho) <= 1e-14


def test_bures_rotated_qubit_pair():
    res = qubit_example(QubitExample(0.7, 0.3, 0.1), 2)
    oracle = np.sqrt(2 - 2 * _qubit_root_fidelity(res.rho0, res.rho1))
    symbolic = np.sqrt(2 - 2 * np.sqrt(1 - 0.4**2 * np.sin(0.1) ** 2))
    assert oracle == pytest.approx(symbolic, abs=1e-12)
    assert bures_distance(res.rho0, res.rho1) == pytest.approx(symbolic, abs=1e-9)
    assert symbolic == pytest.approx(0.039941, abs=1e-6)


@given(seed=st.integers(0, 2**32 - 1))
def test_bures_matches_qubit_oracle(seed):
    s = Spectrum((0.8, 0.2))
    a, b = random_isospectral(s, 2, seed), random_isospectral(s, 2, seed + 1)
    assert bures_distance(a, b) == pytest.approx(np.sqrt(max(0.0, 2 - 2 * _qubit_root_fidelity(a, b))), abs=1e-7)


@given(seed=st.integers(0, 2**32 - 1))
def test_bures_metric_and_invariance(seed):
    rng = np.random.default_rng(seed)
    s = Spectrum((0.5, 0.3, 0.2))
    a, b, c = (random_isospectral(s, 3, rng) for _ in range(3))
    u = haar_unitary(3, rng)
    assert bures_distance(a, c) <= bures_distance(a, b) + bures_distance(b, c) + 1e-8
    assert bures_distance(a, b) == pytest.approx(bures_distance(b, a), abs=1e-8)
    assert bures_distance(u @ a @ dagger(u), u @ b @ dagger(u)) == pytest.approx(bures_distance(a, b), abs=1e-10)


def test_dittmann_examples():
    rho = np.diag([0.7, 0.3]).astype(complex)
    assert dittmann_form(rho, np.zeros((2, 2))) == 0.0
    res = qubit_example(QubitExample(0.7, 0.3, 0.1), 2)
    val = dittmann_form(res.rho0, res.rho1 - res.rho0)
    assert val == pytest.approx(dittmann_closed_form(0.7, 0.3, 0.1), abs=1e-10)
    assert val == pytest.approx(0.039971253859878306, abs=1e-10)


def test_dittmann_closed_form_grid():
    for p1 in np.linspace(0.55, 0.95, 5):
        for eps in np.linspace(0.05, 0.5, 5):
            res = qubit_example(QubitExample(p1, 1 - p1, eps), 2)
            got = dittmann_form(res.rho0, res.rho1 - res.rho0)
            assert abs(got - dittmann_closed_form(p1, 1 - p1, eps)) <= 1e-10


def test_dittmann_rejects_bad_input():
    with pytest.raises(InvalidStateError):
        dittmann_form(np.diag([1.0, 0.0]), np.diag([0.1, -0.1]))
    with pytest.raises(InvalidStateError):
        dittmann_form(np.diag([0.7, 0.3]), np.diag([0.1, 0.1]))
    with pytest.raises(InvalidStateError):
        dittmann_form(np.eye(3) / 3, np.zeros((3, 3)))


def test_dittmann_agrees_to_first_order(rng):
    rho = random_isospectral(Spectrum((0.7, 0.3)), 2, rng)
    h = random_hermitian(2, rng)
    scales = (1e-2, 1e-3, 1e-4)
    errs = dittmann_ratio_errors(rho, h - np.trace(h) / 2 * np.eye(2), scales)
    for e, s in zip(errs, scales):
        assert e <= 0.5 * s
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_qubit_example_construction():
    ex = QubitExample(0.7, 0.3, 0.1)
    res = qubit_example(ex, 256)
    assert_allclose(res.rho0, np.diag([0.7, 0.3]), atol=1e-15)
    assert res.d_claimed == 0.1
    assert res.curve.points.shape[0] == 257
    assert horizontality_residual(res.curve) <= 1e-8
    assert curve_length(res.curve) == pytest.approx(0.1, abs=1e-5)


def test_qubit_example_zero_rotation():
    res = qubit_example(QubitExample(0.7, 0.3, 0.0), 4)
    assert_allclose(res.rho0, res.rho1)
    assert res.d_bures_closed_form == 0
    assert bures_distance(res.rho0, res.rho1) == 0


def test_qubit_example_validation():
    for args in ((0.3, 0.7, 0.1), (0.7, 0.2, 0.1), (0.7, 0.3, -1.0)):
        with pytest.raises(InvalidStateError):
            QubitExample(*args)


def test_compare_identical_states():
    rho = np.diag([0.7, 0.3]).astype(complex)
    out = compare_distances(rho, rho, FAST)
    assert out.dynamic <= 1e-6 and out.bures == 0 and out.trace == 0


def test_compare_rotated_qubit_gap():
    res = qubit_example(QubitExample(0.7, 0.3, 0.1), 2)
    out = compare_distances(res.rho0, res.rho1)
    assert out.dynamic == pytest.approx(0.1, abs=1e-3)
    assert out.bures == pytest.approx(0.0399413323040242, abs=1e-9)
    assert out.gap >= 0.05
    assert set(out.to_dict()) == {"dynamic", "bures", "trace", "gap", "optimizer_report"}


def test_compare_pure_states_arc_above_chord(rng):
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    out = compare_distances(np.outer(a, a.conj()), np.outer(b, b.conj()), FAST)
    overlap = abs(np.vdot(a, b))
    assert out.dynamic == pytest.approx(np.arccos(overlap), abs=1e-3)
    assert out.bures == pytest.approx(np.sqrt(2 - 2 * overlap), abs=1e-9)
    assert out.dynamic >= out.bures
