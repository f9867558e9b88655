"""Invariant checks run by ``isodist verify``.

Every check draws its samples from a generator seeded by the caller and
returns ``(passed, detail)``; :func:`run_checks` wraps them and counts an
exception as a failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bundle as bd
from .bures import QubitExample, bures_distance, dittmann_closed_form, dittmann_form, qubit_example
from .dynamics import (
    LiftedCurve,
    TimeGrid,
    curve_length,
    h_distance,
    horizontal_lift,
    propagator,
    schrodinger_lift,
)
from .geodesics import OptimizerConfig, dynamic_distance, geodesic_between_fibers, horizontality_residual, noether_drift
from .states import (
    Spectrum,
    block_projectors,
    canonical_purification,
    dagger,
    haar_unitary,
    matrix_P,
    random_isospectral,
    spectrum_of,
    trace_distance,
)

MODULE_ALIASES = {
    "states": "states",
    "spectra_states": "states",
    "bundle": "bundle",
    "purification_bundle": "bundle",
    "dynamics": "dynamics",
    "geodesics": "geodesics",
    "bures": "bures",
}

SPECTRA = [
    Spectrum((0.7, 0.3)),
    Spectrum((0.6, 0.4)),
    Spectrum((0.5, 0.3, 0.2)),
    Spectrum((0.5, 0.25, 0.25)),
    Spectrum((0.4, 0.4, 0.2)),
]


@dataclass
class CheckResult:
    name: str
    module: str
    passed: bool
    detail: str


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + dagger(a))


def random_purification(sigma: Spectrum, n: int, rng: np.random.Generator) -> np.ndarray:
    return haar_unitary(n, rng)[:, : sigma.k] * np.sqrt(sigma.p)


def random_tangent(psi: np.ndarray, sigma: Spectrum, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=psi.shape) + 1j * rng.normal(size=psi.shape)
    return bd.tangent_projection(psi, x, sigma)


def jensen_gap(xi: np.ndarray, sigma: Spectrum) -> float:
    """tr(xi P)^2 - tr(xi^2 P); non-negative on u(sigma)."""
    p = matrix_P(sigma)
    return float(np.real(np.trace(xi @ p) ** 2 - np.trace(xi @ xi @ p)))


def jensen_samples(sigma: Spectrum, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Generic elements, exact multiples of i*I, and multiples of i*I with O(1e-3..1) noise."""
    out = []
    for j in range(count):
        kind = j % 4
        if kind == 0 or kind == 1:
            out.append(bd.random_algebra_element(sigma, rng))
        elif kind == 2:
            out.append(1j * rng.normal() * np.eye(sigma.k))
        else:
            noise = bd.random_algebra_element(sigma, rng)
            noise *= 10 ** rng.uniform(-3, 0) / np.linalg.norm(noise)
            out.append(1j * rng.normal() * np.eye(sigma.k) + noise)
    return out


def jensen_check(sigma: Spectrum, xi: np.ndarray) -> tuple[bool, bool]:
    """(inequality holds, equality detection agrees with the identity test)."""
    p = matrix_P(sigma)
    lhs = np.real(np.trace(xi @ xi @ p))
    rhs = np.real(np.trace(xi @ p) ** 2)
    ineq = lhs <= rhs + 1e-12
    equal = abs(rhs - lhs) <= 1e-10
    scalar = np.linalg.norm(xi - np.trace(xi @ p) * np.eye(sigma.k)) <= 1e-8
    return bool(ineq), bool(equal == scalar)


# --- states ---------------------------------------------------------------


def check_purification_roundtrip(rng, samples=50):
    worst = 0.0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        n = sigma.k + j % 2
        rho = random_isospectral(sigma, n, rng)
        psi = canonical_purification(rho, sigma)
        worst = max(worst, np.linalg.norm(psi @ dagger(psi) - rho), np.linalg.norm(dagger(psi) @ psi - matrix_P(sigma)))
    return worst <= 1e-10, f"max defect {worst:.2e}"


def check_isospectral_sampler(rng, samples=200):
    worst = 0.0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        rho = random_isospectral(sigma, sigma.k + 1, rng)
        worst = max(worst, np.max(np.abs(np.array(spectrum_of(rho).values) - sigma.p)))
    return worst <= 1e-10, f"max eigenvalue error {worst:.2e}"


def check_block_projectors(rng, samples=0):
    ok = True
    for sigma in SPECTRA:
        es = block_projectors(sigma)
        p = matrix_P(sigma)
        ok &= np.allclose(sum(es), np.eye(sigma.k), atol=0)
        for i, a in enumerate(es):
            ok &= np.allclose(a @ p, p @ a, atol=1e-15)
            for j, b in enumerate(es):
                ok &= np.allclose(a @ b, a if i == j else 0 * a, atol=0)
    return bool(ok), f"{len(SPECTRA)} spectra"


def check_trace_distance_metric(rng, samples=100):
    worst = 0.0
    for _ in range(samples):
        sigma = SPECTRA[rng.integers(len(SPECTRA))]
        a, b, c = (random_isospectral(sigma, 3, rng) for _ in range(3))
        worst = max(worst, trace_distance(a, c) - trace_distance(a, b) - trace_distance(b, c),
                    abs(trace_distance(a, b) - trace_distance(b, a)), trace_distance(a, a))
    return worst <= 1e-10, f"max violation {worst:.2e}"


# --- bundle ---------------------------------------------------------------


def check_connection_equivariance(rng, samples=50):
    worst = 0.0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        psi = random_purification(sigma, sigma.k + 1, rng)
        x = random_tangent(psi, sigma, rng)
        u = bd.lie_exp(bd.random_algebra_element(sigma, rng))
        lhs = bd.connection_form(psi @ u, x @ u, sigma)
        rhs = dagger(u) @ bd.connection_form(psi, x, sigma) @ u
        worst = max(worst, np.linalg.norm(lhs - rhs))
    return worst <= 1e-10, f"max defect {worst:.2e}"


def check_connection_solves_inertia(rng, samples=30):
    """A(X) from the closed form equals the solution of I(A).xi = J(X).xi over a basis."""
    worst = 0.0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        psi = random_purification(sigma, sigma.k + 1, rng)
        x = random_tangent(psi, sigma, rng)
        basis = bd.gauge_algebra_basis(sigma)
        gram = np.array([[bd.locked_inertia(a, b, sigma) for b in basis] for a in basis])
        rhs = np.array([bd.moment_map(psi, x, b) for b in basis])
        solved = np.tensordot(np.linalg.solve(gram, rhs), np.array(basis), axes=1)
        worst = max(worst, np.linalg.norm(solved - bd.connection_form(psi, x, sigma)))
    return worst <= 1e-10, f"max defect {worst:.2e}"


def check_projections(rng, samples=50):
    worst = 0.0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        psi = random_purification(sigma, sigma.k + 1, rng)
        x = random_tangent(psi, sigma, rng)
        v, h = bd.vertical_projection(psi, x, sigma), bd.horizontal_projection(psi, x, sigma)
        worst = max(
            worst,
            np.linalg.norm(v + h - x),
            abs(np.trace(dagger(v) @ h).real),
            np.linalg.norm(bd.vertical_projection(psi, v, sigma) - v),
            np.linalg.norm(bd.horizontal_projection(psi, h, sigma) - h),
            np.linalg.norm(bd.connection_form(psi, h, sigma)),
        )
    return worst <= 1e-10, f"max defect {worst:.2e}"


def check_jensen(rng, samples=1000):
    bad = 0
    for sigma in SPECTRA:
        for xi in jensen_samples(sigma, samples // len(SPECTRA), rng):
            ineq, iff = jensen_check(sigma, xi)
            bad += not (ineq and iff)
    return bad == 0, f"{bad} violations in {samples} samples"


def check_uhlmann_exclusion(rng, samples=50):
    worst, smin = 0.0, np.inf
    for j in range(samples):
        sigma = [Spectrum((0.7, 0.3)), Spectrum((0.5, 0.3, 0.2)), Spectrum((0.4, 0.3, 0.2, 0.1))][j % 3]
        psi = random_purification(sigma, sigma.k, rng)
        x = random_tangent(psi, sigma, rng)
        both, s = bd.uhlmann_tangent_intersection(psi, x / np.linalg.norm(x))
        worst, smin = max(worst, np.linalg.norm(both)), min(smin, s)
    return worst <= 1e-8 and smin > 1e-6, f"max norm {worst:.2e}, min singular value {smin:.2e}"


def check_retraction_optimality(rng, samples=10, probes=100):
    bad = 0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        n = sigma.k + 1
        m = rng.normal(size=(n, sigma.k)) + 1j * rng.normal(size=(n, sigma.k))
        psi = bd.retract(sigma, m)
        d0 = np.linalg.norm(m - psi)
        for _ in range(probes):
            t = random_tangent(psi, sigma, rng)
            other = bd.retract(sigma, psi + 1e-3 * t / np.linalg.norm(t))
            bad += np.linalg.norm(m - other) < d0 - 1e-14
    return bad == 0, f"{bad} closer probes"


# --- dynamics -------------------------------------------------------------


def check_unitarity(rng, samples=50):
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(2, 5))
        u = propagator(random_hermitian(n, rng, 3.0), np.linspace(0, 5, 11))
        worst = max(worst, np.max(np.abs(dagger(u) @ u - np.eye(n))))
    return worst <= 1e-12, f"max defect {worst:.2e}"


def lift_bound_sample(rng, sigma: Spectrum, n: int, n_steps: int = 128) -> tuple[float, float]:
    h = random_hermitian(n, rng)
    rho0 = random_isospectral(sigma, n, rng)
    grid = TimeGrid(0.0, float(rng.uniform(0.2, 1.5)), n_steps)
    dh, _ = h_distance(h, rho0, grid)
    lift = schrodinger_lift(h, canonical_purification(rho0, sigma), grid, sigma)
    return dh, curve_length(horizontal_lift(lift))


def check_lift_bound(rng, samples=40):
    worst = -np.inf
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        dh, length = lift_bound_sample(rng, sigma, sigma.k + j % 2)
        worst = max(worst, length - dh)
    return worst <= 1e-6, f"max L - D_H = {worst:.2e}"


def rotated_lift_equality_sample(p1: float, eps: float, n_steps: int = 512) -> tuple[float, float, float]:
    ex = QubitExample(p1, 1 - p1, eps)
    grid = TimeGrid(0.0, 1.0, n_steps)
    dh, _ = h_distance(ex.hamiltonian, np.diag([p1, 1 - p1]).astype(complex), grid)
    lift = schrodinger_lift(ex.hamiltonian, ex.psi(0.0), grid, ex.sigma)
    return dh, curve_length(horizontal_lift(lift)), horizontality_residual(lift)


def check_lift_equality(rng, samples=10):
    worst = 0.0
    worst_resid = 0.0
    for _ in range(samples):
        dh, length, resid = rotated_lift_equality_sample(rng.uniform(0.55, 0.95), rng.uniform(0.05, 1.0))
        worst, worst_resid = max(worst, abs(dh - length)), max(worst_resid, resid)
    return worst <= 1e-6 and worst_resid <= 1e-8, f"max |D_H - L| = {worst:.2e}, lift residual {worst_resid:.2e}"


def uncertainty_decomposition_defect(h, psi, sigma: Spectrum) -> float:
    """|Var_rho(H) - (tr(psi'^dagger psi') + tr(A(psi') P)^2)| for psi' = -i H psi."""
    rho = psi @ dagger(psi)
    var = np.trace(h @ h @ rho).real - np.trace(h @ rho).real ** 2
    xdot = -1j * h @ psi
    a = bd.connection_form(psi, xdot, sigma)
    rhs = np.trace(dagger(xdot) @ xdot).real + np.real(np.trace(a @ matrix_P(sigma)) ** 2)
    return float(abs(var - rhs))


def check_uncertainty_decomposition(rng, samples=50):
    worst = 0.0
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        n = sigma.k + j % 2
        worst = max(worst, uncertainty_decomposition_defect(random_hermitian(n, rng), random_purification(sigma, n, rng), sigma))
    return worst <= 1e-8, f"max defect {worst:.2e}"


def lift_residual(lift) -> float:
    """max_i |A_{phi_i}((phi_{i+1} - phi_i) / dt)| for a lifted curve."""
    pts, sigma = lift.points, lift.sigma
    vel = bd.tangent_projection(pts[:-1], np.diff(pts, axis=0) / lift.grid.dt, sigma)
    a = bd._connection(pts[:-1], vel, sigma)
    return float(np.linalg.norm(0.5 * (a - dagger(a)), axis=(1, 2)).max())


def smooth_test_curve(rng, sigma: Spectrum, n: int, n_steps: int):
    """Schroedinger lift of a random H, right-multiplied by a random gauge motion."""
    h = random_hermitian(n, rng)
    xi = bd.random_algebra_element(sigma, rng)
    psi0 = random_purification(sigma, n, rng)

    def build(steps):
        grid = TimeGrid(0.0, 1.0, steps)
        pts = propagator(h, grid.nodes) @ psi0[None] @ np.array([bd.lie_exp(t * xi) for t in grid.nodes])
        return LiftedCurve(grid, pts, sigma)

    return build


def lift_order_ratio(rng, sigma: Spectrum, n: int, n_steps: int = 64) -> float:
    build = smooth_test_curve(rng, sigma, n, n_steps)
    coarse = lift_residual(horizontal_lift(build(n_steps)))
    fine = lift_residual(horizontal_lift(build(2 * n_steps)))
    return coarse / fine


def check_lift_order(rng, samples=10):
    worst = np.inf
    for j in range(samples):
        sigma = SPECTRA[j % len(SPECTRA)]
        worst = min(worst, lift_order_ratio(rng, sigma, sigma.k + 1))
    return worst >= 3.5, f"min residual ratio {worst:.2f}"


# --- geodesics ------------------------------------------------------------

FAST = OptimizerConfig(n_max=64, n_starts=4)


def check_metric_axioms(rng, samples=3, cfg=FAST):
    self_dist = slack = 0.0
    negative = False
    for j in range(samples):
        sigma = [Spectrum((0.7, 0.3)), Spectrum((0.5, 0.3, 0.2))][j % 2]
        n = sigma.k
        a, b, c = (random_isospectral(sigma, n, rng) for _ in range(3))
        dab, dbc, dac = (dynamic_distance(x, y, cfg)[0] for x, y in ((a, b), (b, c), (a, c)))
        dba = dynamic_distance(b, a, cfg)[0]
        self_dist = max(self_dist, dynamic_distance(a, a, cfg)[0])
        slack = max(slack, abs(dab - dba), dac - dab - dbc)
        negative |= min(dab, dbc, dac, dba) < 0
    ok = self_dist <= 1e-6 and slack <= 2e-3 and not negative
    return ok, f"D(a,a) <= {self_dist:.2e}, symmetry/triangle slack {slack:.2e}"


def check_unitary_invariance(rng, samples=2, cfg=FAST):
    worst = 0.0
    for _ in range(samples):
        sigma = Spectrum((0.6, 0.4))
        a, b = random_isospectral(sigma, 2, rng), random_isospectral(sigma, 2, rng)
        u = haar_unitary(2, rng)
        worst = max(worst, abs(dynamic_distance(u @ a @ dagger(u), u @ b @ dagger(u), cfg)[0] - dynamic_distance(a, b, cfg)[0]))
    return worst <= 2e-3, f"max |D(UaU+, UbU+) - D(a, b)| = {worst:.2e}"


def check_reversal_and_concatenation(rng, samples=2, cfg=FAST):
    reversal = concat = 0.0
    for _ in range(samples):
        sigma = Spectrum((0.7, 0.3))
        a, b, c = (random_isospectral(sigma, 2, rng) for _ in range(3))
        pa, pb, pc = (canonical_purification(x, sigma) for x in (a, b, c))
        path_ab, rep_ab = geodesic_between_fibers(pa, pb, sigma, cfg)
        # start the second leg where the first ended so the legs join
        _, rep_bc = geodesic_between_fibers(path_ab.points[-1], pc, sigma, cfg)
        dac = dynamic_distance(a, c, cfg)[0]
        reversal = max(reversal, abs(curve_length(path_ab.reversed()) - curve_length(path_ab)))
        concat = max(concat, dac - (rep_ab.distance + rep_bc.distance))
    return reversal <= 1e-12 and concat <= 1e-6, f"reversal {reversal:.2e}, D(a,c) - L(a->b->c) = {concat:.2e}"


def check_noether_exact_curve(rng, samples=5):
    worst = 0.0
    for _ in range(samples):
        p1 = rng.uniform(0.55, 0.95)
        res = qubit_example(QubitExample(p1, 1 - p1, rng.uniform(0.05, 0.5)), 64)
        worst = max(worst, noether_drift(res.curve), horizontality_residual(res.curve))
    return worst <= 1e-8, f"max drift/residual {worst:.2e}"


def check_noether_optimized(rng, samples=2, cfg=OptimizerConfig(n_starts=2)):
    worst = 0.0
    for _ in range(samples):
        sigma = Spectrum((0.5, 0.3, 0.2))
        a, b = random_isospectral(sigma, 3, rng), random_isospectral(sigma, 3, rng)
        d, rep = dynamic_distance(a, b, cfg)
        worst = max(worst, rep.noether_drift / d)
    return worst <= 1e-4, f"max normalized drift {worst:.2e}"


# --- bures ----------------------------------------------------------------


def check_bures_metric(rng, samples=100):
    metric = invariance = 0.0
    for _ in range(samples):
        n = int(rng.integers(2, 4))
        sigma = Spectrum((0.6, 0.4)) if n == 2 else Spectrum((0.5, 0.3, 0.2))
        a, b, c = (random_isospectral(sigma, n, rng) for _ in range(3))
        u = haar_unitary(n, rng)
        metric = max(
            metric,
            bures_distance(a, c) - bures_distance(a, b) - bures_distance(b, c),
            abs(bures_distance(a, b) - bures_distance(b, a)),
            bures_distance(a, a),
        )
        invariance = max(invariance, abs(bures_distance(u @ a @ dagger(u), u @ b @ dagger(u)) - bures_distance(a, b)))
    return metric <= 1e-8 and invariance <= 1e-10, f"metric slack {metric:.2e}, invariance {invariance:.2e}"


def check_dynamic_above_bures(rng, samples=3, cfg=FAST):
    worst = -np.inf
    for j in range(samples):
        sigma = [Spectrum((0.7, 0.3)), Spectrum((0.5, 0.3, 0.2))][j % 2]
        a, b = random_isospectral(sigma, sigma.k, rng), random_isospectral(sigma, sigma.k, rng)
        worst = max(worst, bures_distance(a, b) - dynamic_distance(a, b, cfg)[0])
    return worst <= 2e-3, f"max D_B - D = {worst:.2e}"


def check_dittmann_closed_form(rng, samples=0):
    worst = 0.0
    for p1 in np.linspace(0.55, 0.95, 5):
        for eps in np.linspace(0.05, 0.5, 5):
            res = qubit_example(QubitExample(p1, 1 - p1, eps), 2)
            worst = max(worst, abs(dittmann_form(res.rho0, res.rho1 - res.rho0) - dittmann_closed_form(p1, 1 - p1, eps)))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def dittmann_ratio_errors(rho, direction, scales=(1e-2, 1e-3, 1e-4)) -> list[float]:
    out = []
    for s in scales:
        d = s * direction / np.linalg.norm(direction)
        out.append(abs(dittmann_form(rho, d) / bures_distance(rho, rho + d) - 1))
    return out


def check_dittmann_limit(rng, samples=10):
    ok = True
    for _ in range(samples):
        rho = random_isospectral(Spectrum((0.7, 0.3)), 2, rng)
        h = random_hermitian(2, rng)
        scales = (1e-2, 1e-3, 1e-4)
        errs = dittmann_ratio_errors(rho, h - np.trace(h) / 2 * np.eye(2), scales)
        # first-order agreement: the relative error is O(|drho|)
        ok &= all(e <= 0.5 * s for e, s in zip(errs, scales))
        ok &= errs[0] >= 8 * errs[1] and errs[1] >= 8 * errs[2]
    return bool(ok), f"{samples} directions"


CHECKS: list[tuple[str, str, Callable]] = [
    ("purification_roundtrip", "states", check_purification_roundtrip),
    ("isospectral_sampler", "states", check_isospectral_sampler),
    ("block_projectors", "states", check_block_projectors),
    ("trace_distance_metric", "states", check_trace_distance_metric),
    ("connection_equivariance", "bundle", check_connection_equivariance),
    ("connection_solves_inertia", "bundle", check_connection_solves_inertia),
    ("projections_orthogonal", "bundle", check_projections),
    ("jensen_inequality", "bundle", check_jensen),
    ("uhlmann_exclusion", "bundle", check_uhlmann_exclusion),
    ("retraction_optimality", "bundle", check_retraction_optimality),
    ("propagator_unitarity", "dynamics", check_unitarity),
    ("h_distance_bounds_lift", "dynamics", check_lift_bound),
    ("h_distance_equality_case", "dynamics", check_lift_equality),
    ("uncertainty_decomposition", "dynamics", check_uncertainty_decomposition),
    ("horizontal_lift_order2", "dynamics", check_lift_order),
    ("metric_axioms", "geodesics", check_metric_axioms),
    ("unitary_invariance", "geodesics", check_unitary_invariance),
    ("reversal_concatenation", "geodesics", check_reversal_and_concatenation),
    ("noether_exact_curve", "geodesics", check_noether_exact_curve),
    ("noether_optimized", "geodesics", check_noether_optimized),
    ("bures_metric", "bures", check_bures_metric),
    ("dynamic_above_bures", "bures", check_dynamic_above_bures),
    ("dittmann_closed_form", "bures", check_dittmann_closed_form),
    ("dittmann_limit", "bures", check_dittmann_limit),
]


def run_checks(seed: int = 0, module: str | None = None) -> list[CheckResult]:
    if module is not None:
        if module not in MODULE_ALIASES:
            raise ValueError(f"unknown module {module!r}; choose from {sorted(MODULE_ALIASES)}")
        module = MODULE_ALIASES[module]
    results = []
    for i, (name, mod, fn) in enumerate(CHECKS):
        if module is not None and mod != module:
            continue
        rng = np.random.default_rng([seed, i])
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, mod, bool(passed), detail))
    return results
