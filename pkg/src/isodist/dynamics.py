"""Unitary dynamics of isospectral states and their lifts to S(sigma)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .bundle import _connection, project_pi, retract, tangent_projection
from .errors import InvalidStateError
from .states import Spectrum, check_density, check_hermitian, dagger, matrix_P

RADICAND_TOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise InvalidStateError("t_end must exceed t_start")
        if self.n_steps < 2 or self.n_steps % 2:
            raise InvalidStateError(f"n_steps must be a positive even integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)

    def refined(self) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, 2 * self.n_steps)


@dataclass(frozen=True)
class DensityCurve:
    grid: TimeGrid
    states: np.ndarray  # (n_steps + 1, n, n)


@dataclass(frozen=True)
class LiftedCurve:
    """Curve in S(sigma) sampled on a grid; ``points`` has shape (N + 1, n, k)."""

    grid: TimeGrid
    points: np.ndarray
    sigma: Spectrum

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 3 or pts.shape[0] != self.grid.n_steps + 1 or pts.shape[2] != self.sigma.k:
            raise InvalidStateError(f"points have shape {pts.shape}, incompatible with grid/sigma")
        defect = np.linalg.norm(dagger(pts) @ pts - matrix_P(self.sigma), axis=(1, 2)).max()
        if defect > 1e-8:
            raise InvalidStateError(f"curve leaves S(sigma) (max defect {defect:.3g})")
        object.__setattr__(self, "points", pts)

    def reversed(self) -> "LiftedCurve":
        return LiftedCurve(self.grid, self.points[::-1].copy(), self.sigma)

    def project(self) -> DensityCurve:
        return DensityCurve(self.grid, project_pi(self.points))


def propagator(h, t) -> np.ndarray:
    """exp(-i H t) for Hermitian H; ``t`` may be an array of times (stacked output)."""
    w, v = np.linalg.eigh(check_hermitian(h))
    phases = np.exp(-1j * np.multiply.outer(np.atleast_1d(t), w))
    u = (v[None] * phases[:, None, :]) @ dagger(v)[None]
    return u if np.ndim(t) else u[0]


def evolve_density(h, rho0, grid: TimeGrid) -> DensityCurve:
    """Solution of i drho/dt = [H, rho] for constant H, sampled on ``grid``."""
    rho0 = check_density(rho0)
    h = check_hermitian(h)
    if h.shape != rho0.shape:
        raise InvalidStateError(f"dimension mismatch: H {h.shape}, rho {rho0.shape}")
    u = propagator(h, grid.nodes - grid.t_start)
    states = u @ rho0[None] @ dagger(u)
    return DensityCurve(grid, 0.5 * (states + dagger(states)))


def schrodinger_lift(h, psi0, grid: TimeGrid, sigma: Spectrum) -> LiftedCurve:
    """psi(t) = exp(-i H (t - t0)) psi0, the lift solving i dpsi/dt = H psi."""
    h = check_hermitian(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if h.shape[0] != psi0.shape[0]:
        raise InvalidStateError(f"dimension mismatch: H {h.shape}, psi {psi0.shape}")
    u = propagator(h, grid.nodes - grid.t_start)
    return LiftedCurve(grid, u @ psi0[None], sigma)


def uncertainty(h, rho) -> float:
    """Energy uncertainty sqrt(tr(H^2 rho) - tr(H rho)^2)."""
    h, rho = np.asarray(h, dtype=complex), np.asarray(rho, dtype=complex)
    if h.shape != rho.shape:
        raise InvalidStateError(f"dimension mismatch: H {h.shape}, rho {rho.shape}")
    # centered form avoids the cancellation in tr(H^2 rho) - tr(H rho)^2
    hc = h - np.trace(h @ rho).real * np.eye(h.shape[0])
    radicand = np.trace(hc @ hc @ rho).real
    if radicand < -RADICAND_TOL:
        raise InvalidStateError(f"negative variance {radicand:.3g}; inconsistent inputs")
    return float(np.sqrt(max(radicand, 0.0)))


def uncertainty_trace(h, rho0, grid: TimeGrid) -> tuple[np.ndarray, DensityCurve]:
    curve = evolve_density(h, rho0, grid)
    return np.array([uncertainty(h, r) for r in curve.states]), curve


def h_distance(h, rho0, grid: TimeGrid) -> tuple[float, np.ndarray]:
    """Time integral of the uncertainty of H along the von Neumann flow from ``rho0``.

    Composite Simpson rule on ``grid``. Returns the value and the final
    state, so callers can compare it with the intended target.
    """
    values, curve = uncertainty_trace(h, rho0, grid)
    return float(simpson(values, dx=grid.dt)), curve.states[-1]


def horizontal_lift(lift: LiftedCurve) -> LiftedCurve:
    """Horizontal curve over the same density curve, starting at ``lift.points[0]``.

    The gauge transport U' = -A(psi') U is integrated with the exponential
    midpoint rule: the connection is evaluated at the retracted midpoint of
    each step on the chord velocity.
    """
    sigma, pts, dt = lift.sigma, lift.points, lift.grid.dt
    k = sigma.k
    mids = retract(sigma, 0.5 * (pts[1:] + pts[:-1]))
    vel = tangent_projection(mids, (pts[1:] - pts[:-1]) / dt, sigma)
    xis = _connection(mids, vel, sigma)
    xis = 0.5 * (xis - dagger(xis))
    steps = _expm_antihermitian(-dt * xis)
    gauges = np.empty((len(pts), k, k), dtype=complex)
    gauges[0] = np.eye(k)
    for i, step in enumerate(steps):
        gauges[i + 1] = step @ gauges[i]
    return LiftedCurve(lift.grid, pts @ gauges, sigma)


def _expm_antihermitian(a: np.ndarray) -> np.ndarray:
    # exp of a stack of anti-Hermitian matrices through the Hermitian eigenproblem of i*a
    w, v = np.linalg.eigh(1j * a)
    return (v * np.exp(-1j * w)[..., None, :]) @ dagger(v)


def curve_length(lift: LiftedCurve) -> float:
    """Chordal length: sum of Frobenius norms of consecutive differences."""
    return float(np.linalg.norm(np.diff(lift.points, axis=0), axis=(1, 2)).sum())


def curve_energy(lift: LiftedCurve) -> float:
    d = np.diff(lift.points, axis=0)
    return float(np.sum(np.abs(d) ** 2) / (2 * lift.grid.dt))


def hamiltonian_from_lift(psi, xdot) -> tuple[np.ndarray, float]:
    """Minimum-norm Hermitian H minimizing |H psi - i xdot|_F.

    H is parametrized by n^2 real coordinates (real diagonal, real and
    imaginary parts above the diagonal) and found by real least squares.
    Returns H and the residual norm.
    """
    psi, xdot = np.asarray(psi, dtype=complex), np.asarray(xdot, dtype=complex)
    n = psi.shape[0]
    basis = _hermitian_basis(n)
    cols = [_realify(b @ psi) for b in basis]
    target = _realify(1j * xdot)
    coeffs, *_ = np.linalg.lstsq(np.array(cols).T, target, rcond=None)
    h = np.tensordot(coeffs, np.array(basis), axes=1)
    resid = float(np.linalg.norm(h @ psi - 1j * xdot))
    return 0.5 * (h + dagger(h)), resid


def _realify(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _hermitian_basis(n: int) -> list[np.ndarray]:
    # orthonormal in the Frobenius product, so min coefficient norm = min |H|_F
    out = []
    for a in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[a, a] = 1.0
        out.append(e)
    r = 1 / np.sqrt(2)
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = e[b, a] = r
            out.append(e)
            e = np.zeros((n, n), dtype=complex)
            e[a, b], e[b, a] = -1j * r, 1j * r
            out.append(e)
    return out
