import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import subspace_angles

from isodist import bundle as bd
from isodist.bures import QubitExample, qubit_example
from isodist.dynamics import LiftedCurve, TimeGrid, curve_length
from isodist.errors import InvalidStateError, NotIsospectralError
from isodist.geodesics import (
    OptimizerConfig,
    align_gauges,
    dynamic_distance,
    geodesic_between_fibers,
    horizontality_residual,
    initial_path,
    noether_drift,
    shorten,
)
from isodist.states import Spectrum, canonical_purification, dagger, haar_unitary, random_isospectral

FAST = OptimizerConfig(n_max=64, n_starts=4)


def _pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_config_validation():
    for kwargs in ({"n_coarse": 3}, {"n_max": 100}, {"n_max": 4}, {"rel_tol": 0}, {"n_starts": 0}):
        with pytest.raises(InvalidStateError):
            OptimizerConfig(**kwargs)


def test_initial_path_constant():
    s = Spectrum((0.7, 0.3))
    psi = np.diag(np.sqrt(s.p)).astype(complex)
    path = initial_path(psi, psi, 8, s)
    assert_allclose(path.points, np.broadcast_to(psi, path.points.shape), atol=1e-15)
    assert noether_drift(path) == 0


def test_identical_states_have_zero_distance(rng):
    rho = random_isospectral(Spectrum((0.5, 0.3, 0.2)), 3, rng)
    d, report = dynamic_distance(rho, rho, FAST)
    assert d <= 1e-6
    assert report.converged


def test_rotated_qubit_distance():
    res = qubit_example(QubitExample(0.7, 0.3, 0.1))
    d, report = dynamic_distance(res.rho0, res.rho1)
    assert abs(d - 0.1) <= 1e-3
    assert report.horizontality_residual <= 1e-3
    assert len(report.start_lengths) == 8


def test_shorten_keeps_a_geodesic():
    res = qubit_example(QubitExample(0.7, 0.3, 0.1), 8)
    cfg = OptimizerConfig(n_coarse=8, n_max=256)
    out, report = shorten(res.curve, res.curve.points[0], res.curve.points[-1], cfg)
    assert abs(report.distance - 0.1) <= 1e-5
    first = report.energy_trace[0]
    initial = res.curve.points
    e0 = np.sum(np.abs(np.diff(initial, axis=0)) ** 2) / (2 * res.curve.grid.dt)
    assert e0 - first[2] < 1e-6 * e0


def test_pure_state_example():
    d, _ = dynamic_distance(_pure([1, 0]), _pure([1, 1]))
    assert abs(d - np.arccos(1 / np.sqrt(2))) <= 1e-3


@settings(max_examples=8)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4))
def test_pure_states_match_sphere_distance(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    d, _ = dynamic_distance(np.outer(a, a.conj()), np.outer(b, b.conj()), FAST)
    assert abs(d - np.arccos(min(1.0, abs(np.vdot(a, b))))) <= 1e-3


def test_degenerate_spectrum_matches_grassmann_distance(rng):
    # sigma = (1/2, 1/2): the fiber is all of U(2), so the distance is the
    # Grassmann distance of the column spaces scaled by 1/sqrt(2)
    s = Spectrum((0.5, 0.5))
    for _ in range(3):
        qa, qb = haar_unitary(4, rng)[:, :2], haar_unitary(4, rng)[:, :2]
        # keep well inside the injectivity radius
        qb = qa + 0.6 * (qb - qa)
        qb, _ = np.linalg.qr(qb)
        rho_a, rho_b = 0.5 * qa @ dagger(qa), 0.5 * qb @ dagger(qb)
        theta = subspace_angles(qa, qb)
        d, _ = dynamic_distance(rho_a, rho_b, FAST)
        assert abs(d - np.sqrt(np.sum(theta**2)) / np.sqrt(2)) <= 1e-3


def test_non_isospectral_rejected():
    with pytest.raises(NotIsospectralError):
        dynamic_distance(np.diag([0.7, 0.3]), np.diag([0.6, 0.4]))
    with pytest.raises(InvalidStateError):
        dynamic_distance(np.diag([0.7, 0.3]), np.diag([0.7, 0.3, 0.0]))


def test_metric_axioms_small_sample(rng):
    s = Spectrum((0.7, 0.3))
    a, b, c = (random_isospectral(s, 2, rng) for _ in range(3))
    dab, dbc, dac, dba = (dynamic_distance(x, y, FAST)[0] for x, y in ((a, b), (b, c), (a, c), (b, a)))
    assert min(dab, dbc, dac) > 0
    assert abs(dab - dba) <= 2e-3
    assert dac <= dab + dbc + 2e-3


def test_unitary_invariance(rng):
    s = Spectrum((0.5, 0.3, 0.2))
    a, b = random_isospectral(s, 3, rng), random_isospectral(s, 3, rng)
    u = haar_unitary(3, rng)
    d0 = dynamic_distance(a, b, FAST)[0]
    d1 = dynamic_distance(u @ a @ dagger(u), u @ b @ dagger(u), FAST)[0]
    assert abs(d0 - d1) <= 2e-3


def test_reversal_and_concatenation(rng):
    s = Spectrum((0.7, 0.3))
    a, b, c = (random_isospectral(s, 2, rng) for _ in range(3))
    pa, pb, pc = (canonical_purification(x, s) for x in (a, b, c))
    path_ab, rep_ab = geodesic_between_fibers(pa, pb, s, FAST)
    _, rep_bc = geodesic_between_fibers(path_ab.points[-1], pc, s, FAST)
    assert curve_length(path_ab.reversed()) == pytest.approx(curve_length(path_ab), abs=1e-12)
    assert rep_ab.distance + rep_bc.distance >= dynamic_distance(a, c, FAST)[0] - 1e-6


def test_energy_trace_is_monotone_within_each_level(rng):
    s = Spectrum((0.5, 0.3, 0.2))
    a, b = random_isospectral(s, 3, rng), random_isospectral(s, 3, rng)
    _, report = dynamic_distance(a, b, FAST)
    trace = np.array(report.energy_trace)
    for level in np.unique(trace[:, 0]):
        e = trace[trace[:, 0] == level, 2]
        assert np.all(np.diff(e) <= 1e-12 * e[:-1] + 1e-20)


def test_deterministic_for_a_seed(rng):
    s = Spectrum((0.7, 0.3))
    a, b = random_isospectral(s, 2, rng), random_isospectral(s, 2, rng)
    r1, r2 = dynamic_distance(a, b, FAST)[1], dynamic_distance(a, b, FAST)[1]
    assert r1.to_dict() == r2.to_dict()


def test_align_gauges_never_increases_energy(rng):
    s = Spectrum((0.5, 0.25, 0.25))
    pa, pb = (canonical_purification(random_isospectral(s, 3, rng), s) for _ in range(2))
    pts = initial_path(pa, pb, 16, s).points
    pts[1:] = pts[1:] @ np.array([bd.lie_exp(bd.random_algebra_element(s, rng)) for _ in range(16)])
    before = np.sum(np.abs(np.diff(pts, axis=0)) ** 2)
    align_gauges(pts, s)
    after = np.sum(np.abs(np.diff(pts, axis=0)) ** 2)
    assert after <= before + 1e-14
    assert_allclose(pts[0], pa)


def test_noether_and_residual_on_exact_curve():
    res = qubit_example(QubitExample(0.8, 0.2, 0.3), 64)
    assert noether_drift(res.curve) <= 1e-8
    assert horizontality_residual(res.curve) <= 1e-8


def test_vertical_motion_has_residual_of_generator_size(rng):
    s = Spectrum((0.7, 0.3))
    psi0 = np.diag(np.sqrt(s.p)).astype(complex)
    xi = 1j * np.diag([0.4, -0.2])
    grid = TimeGrid(0, 1, 32)
    curve = LiftedCurve(grid, psi0 @ np.array([bd.lie_exp(t * xi) for t in grid.nodes]), s)
    assert horizontality_residual(curve) == pytest.approx(np.linalg.norm(xi), rel=1e-2)


def test_optimized_geodesic_is_nearly_horizontal(rng):
    s = Spectrum((0.5, 0.3, 0.2))
    a, b = random_isospectral(s, 3, rng), random_isospectral(s, 3, rng)
    resid = []
    for n_max in (64, 128):
        _, report = dynamic_distance(a, b, OptimizerConfig(n_max=n_max, n_starts=2))
        resid.append(report.horizontality_residual)
        assert report.noether_drift / report.distance <= 1e-4
    assert resid[1] <= 1e-3
    assert resid[1] < resid[0]
