"""Fidelity, Bures distance, and the two-level comparison with the dynamic distance."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bundle import project_pi
from .dynamics import LiftedCurve, TimeGrid
from .errors import InvalidStateError
from .geodesics import OptimizerConfig, OptimizationReport, dynamic_distance
from .states import Spectrum, check_hermitian, dagger, trace_distance

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-12


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def fidelity(rho0, rho1) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho0) rho1 sqrt(rho0)))^2."""
    rho0, rho1 = np.asarray(rho0, dtype=complex), np.asarray(rho1, dtype=complex)
    if rho0.shape != rho1.shape:
        raise InvalidStateError(f"dimension mismatch: {rho0.shape} vs {rho1.shape}")
    s = _psd_sqrt(rho0)
    m = s @ rho1 @ s
    w = np.linalg.eigvalsh(0.5 * (m + dagger(m)))
    if w.min() < -CLAMP_TOL:
        raise InvalidStateError(f"sqrt(rho0) rho1 sqrt(rho0) has eigenvalue {w.min():.3g}")
    f = np.sqrt(np.clip(w, 0.0, None)).sum() ** 2
    return float(min(max(f, 0.0), 1.0))


def bures_distance(rho0, rho1) -> float:
    """sqrt(2 - 2 sqrt(F)), evaluated as min_U |sqrt(rho0) - sqrt(rho1) U|_F.

    The minimizing unitary is the polar factor of sqrt(rho1)^dagger sqrt(rho0);
    taking the norm of a difference avoids the cancellation in 2 - 2 sqrt(F)
    for nearby states.
    """
    rho0, rho1 = np.asarray(rho0, dtype=complex), np.asarray(rho1, dtype=complex)
    if rho0.shape != rho1.shape:
        raise InvalidStateError(f"dimension mismatch: {rho0.shape} vs {rho1.shape}")
    s0, s1 = _psd_sqrt(rho0), _psd_sqrt(rho1)
    w, _, vh = np.linalg.svd(dagger(s1) @ s0)
    return float(np.linalg.norm(s0 - s1 @ (w @ vh)))


def dittmann_form(rho, drho) -> float:
    """Square root of the explicit 2x2 Bures quadratic form at ``rho`` on ``drho``.

    1/4 tr(drho drho + (drho - rho drho)^2 / det(rho)). Exact for
    infinitesimal displacements only; at a finite displacement it differs from
    :func:`bures_distance`.
    """
    rho = check_hermitian(rho, "density matrix")
    drho = check_hermitian(drho, "displacement")
    if rho.shape != (2, 2) or drho.shape != (2, 2):
        raise InvalidStateError("dittmann_form is defined for 2x2 matrices only")
    if abs(np.trace(drho)) > 1e-10:
        raise InvalidStateError("displacement must be traceless")
    det = np.linalg.det(rho).real
    if det <= 1e-12:
        raise InvalidStateError(f"rho is singular (det = {det:.3g})")
    q = drho - rho @ drho
    val = 0.25 * np.trace(drho @ drho + q @ q / det).real
    if val < -CLAMP_TOL:
        raise InvalidStateError(f"negative quadratic form value {val:.3g}")
    return float(np.sqrt(max(val, 0.0)))


def dittmann_closed_form(p1: float, p2: float, eps: float) -> float:
    """Closed-form value of :func:`dittmann_form` on the rotated qubit pair."""
    d = p1 - p2
    s = np.sin(eps)
    return float(d / np.sqrt(2) * abs(s) * np.sqrt(2 + d**2 * s**2 / (2 * p1 * p2)))


@dataclass(frozen=True)
class QubitExample:
    """Rotation of diag(p1, p2) at rate eps for unit time."""

    p1: float
    p2: float
    eps: float

    def __post_init__(self):
        if abs(self.p1 + self.p2 - 1.0) > 1e-12:
            raise InvalidStateError("p1 + p2 must equal 1")
        if not self.p1 >= self.p2 > 0:
            raise InvalidStateError("need p1 >= p2 > 0")
        if self.eps < 0:
            raise InvalidStateError("eps must be non-negative")

    @property
    def sigma(self) -> Spectrum:
        return Spectrum((self.p1, self.p2))

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.eps * np.array([[0, 1j], [-1j, 0]])

    def psi(self, t) -> np.ndarray:
        """psi(t) = [[sqrt(p1) cos(eps t), sqrt(p2) sin(eps t)], [-sqrt(p1) sin(eps t), sqrt(p2) cos(eps t)]]."""
        t = np.asarray(t, dtype=float)
        c, s = np.cos(self.eps * t), np.sin(self.eps * t)
        a, b = np.sqrt(self.p1), np.sqrt(self.p2)
        out = np.stack([np.stack([a * c, b * s], -1), np.stack([-a * s, b * c], -1)], -2)
        return out.astype(complex)


@dataclass(frozen=True)
class QubitExampleResult:
    curve: LiftedCurve
    rho0: np.ndarray
    rho1: np.ndarray
    d_claimed: float
    d_bures_closed_form: float


def qubit_example(ex: QubitExample, n_steps: int = 256) -> QubitExampleResult:
    grid = TimeGrid(0.0, 1.0, n_steps)
    curve = LiftedCurve(grid, ex.psi(grid.nodes), ex.sigma)
    return QubitExampleResult(
        curve=curve,
        rho0=project_pi(curve.points[0]),
        rho1=project_pi(curve.points[-1]),
        d_claimed=ex.eps,
        d_bures_closed_form=dittmann_closed_form(ex.p1, ex.p2, ex.eps),
    )


@dataclass
class DistanceComparison:
    dynamic: float
    bures: float
    trace: float
    gap: float
    report: OptimizationReport

    def to_dict(self) -> dict:
        return {
            "dynamic": self.dynamic,
            "bures": self.bures,
            "trace": self.trace,
            "gap": self.gap,
            "optimizer_report": self.report.to_dict(),
        }


GAP_SLACK = 2e-3


def compare_distances(rho0, rho1, cfg: OptimizerConfig = OptimizerConfig()) -> DistanceComparison:
    """Dynamic, Bures and trace distance of an isospectral pair; gap = dynamic - bures."""
    dyn, report = dynamic_distance(rho0, rho1, cfg)
    bur = bures_distance(rho0, rho1)
    gap = dyn - bur
    if gap < -GAP_SLACK:
        log.warning("dynamic distance %.6g below Bures distance %.6g", dyn, bur)
    return DistanceComparison(dyn, bur, trace_distance(rho0, rho1), gap, report)

