"""Geometry of the purification bundle S(sigma) -> D(sigma).

A point of S(sigma) is an n x k matrix ``psi`` with ``psi^dagger psi = P``,
where ``P = diag(sigma)``. The gauge group U(sigma) consists of the k x k
unitaries that are block diagonal on the multiplicity blocks of sigma; it
acts by right multiplication. Tangent vectors at ``psi`` satisfy
``psi^dagger X + X^dagger psi = 0``.

Most functions accept stacked inputs (leading batch axes) where that comes
for free with numpy broadcasting; the optimizer relies on this.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .errors import InvalidStateError, NotTangentError, RetractionError
from .states import Spectrum, block_mask, dagger, matrix_P

PURIFICATION_TOL = 1e-10
TANGENT_TOL = 1e-8
ALGEBRA_TOL = 1e-12
RETRACT_SV_MIN = 1e-12


def check_purification(psi, sigma: Spectrum, tol: float = PURIFICATION_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 2 or psi.shape[1] != sigma.k or psi.shape[0] < sigma.k:
        raise InvalidStateError(f"purification must be n x {sigma.k} with n >= k, got {psi.shape}")
    dev = np.linalg.norm(dagger(psi) @ psi - matrix_P(sigma))
    if dev > tol:
        raise InvalidStateError(f"psi^dagger psi deviates from P(sigma) by {dev:.3g}")
    return psi


def tangency_defect(psi, x) -> float:
    s = dagger(psi) @ x
    return float(np.linalg.norm(s + dagger(s)))


def check_tangent(psi, x, tol: float = TANGENT_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != np.shape(psi):
        raise NotTangentError(f"shape mismatch {x.shape} vs {np.shape(psi)}")
    dev = tangency_defect(psi, x)
    if dev > tol:
        raise NotTangentError(f"psi^dagger X + X^dagger psi has norm {dev:.3g}")
    return x


def check_algebra(xi, sigma: Spectrum, tol: float = ALGEBRA_TOL) -> np.ndarray:
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (sigma.k, sigma.k):
        raise InvalidStateError(f"gauge algebra element must be {sigma.k}x{sigma.k}")
    if np.max(np.abs(xi + dagger(xi))) > tol:
        raise InvalidStateError("gauge algebra element is not anti-Hermitian")
    if np.max(np.abs(xi[~block_mask(sigma)]), initial=0.0) > tol:
        raise InvalidStateError("gauge algebra element does not commute with P(sigma)")
    return xi


def check_gauge(u, sigma: Spectrum, tol: float = ALGEBRA_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (sigma.k, sigma.k):
        raise InvalidStateError(f"gauge element must be {sigma.k}x{sigma.k}")
    if np.max(np.abs(dagger(u) @ u - np.eye(sigma.k))) > tol:
        raise InvalidStateError("gauge element is not unitary")
    if np.max(np.abs(u[~block_mask(sigma)]), initial=0.0) > tol:
        raise InvalidStateError("gauge element does not commute with P(sigma)")
    return u


def project_pi(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    rho = psi @ dagger(psi)
    return 0.5 * (rho + dagger(rho))


def apply_gauge(psi, u) -> np.ndarray:
    return np.asarray(psi) @ np.asarray(u)


def tangent_projection(psi, x, sigma: Spectrum) -> np.ndarray:
    """Orthogonal projection of an ambient n x k matrix onto the tangent space at ``psi``.

    The normal space at psi is {psi S : S Hermitian}; S solves the Sylvester
    equation P S + S P = psi^dagger X + X^dagger psi in closed form.
    """
    s = dagger(psi) @ x
    p = sigma.p
    herm = (s + dagger(s)) / (p[:, None] + p[None, :])
    return x - psi @ herm


def _connection(psi, x, sigma: Spectrum) -> np.ndarray:
    # sum_j E_j psi^dagger X E_j P^{-1}: keep the diagonal blocks, scale columns by 1/p
    s = dagger(psi) @ x
    return np.where(block_mask(sigma), s, 0.0) / sigma.p


def connection_form(psi, x, sigma: Spectrum) -> np.ndarray:
    """Mechanical connection A_psi(X), an element of u(sigma).

    ``x`` must be tangent at ``psi`` (to 1e-8); project ambient matrices with
    :func:`tangent_projection` first.
    """
    check_tangent(psi, x)
    a = _connection(psi, x, sigma)
    # Remove the O(tangency defect) Hermitian part so the output is exactly in u(sigma).
    return 0.5 * (a - dagger(a))


def moment_map(psi, x, xi) -> float:
    """J_psi(X) . xi = 1/2 tr(X^dagger psi xi + xi^dagger psi^dagger X)."""
    return float(np.real(np.trace(dagger(x) @ psi @ xi)))


def locked_inertia(xi, eta, sigma: Spectrum) -> float:
    """I(xi) . eta = 1/2 tr((xi^dagger eta + eta^dagger xi) P)."""
    m = dagger(xi) @ eta
    return float(np.real(np.trace((m + dagger(m)) * sigma.p[None, :])) / 2)


def vertical_projection(psi, x, sigma: Spectrum) -> np.ndarray:
    return np.asarray(psi) @ connection_form(psi, x, sigma)


def horizontal_projection(psi, x, sigma: Spectrum) -> np.ndarray:
    return np.asarray(x) - vertical_projection(psi, x, sigma)


def gauge_algebra_basis(sigma: Spectrum) -> list[np.ndarray]:
    """Real basis of u(sigma), block by block.

    Within a block of size m: the m diagonal elements i e_jj, then for each
    a < b the pair (e_ab - e_ba, i(e_ab + e_ba)).
    """
    k = sigma.k
    basis = []
    for blk in sigma.blocks:
        idx = range(blk.start, blk.stop)
        for j in idx:
            e = np.zeros((k, k), dtype=complex)
            e[j, j] = 1j
            basis.append(e)
        for a in idx:
            for b in idx:
                if a >= b:
                    continue
                e = np.zeros((k, k), dtype=complex)
                e[a, b], e[b, a] = 1.0, -1.0
                basis.append(e)
                e = np.zeros((k, k), dtype=complex)
                e[a, b], e[b, a] = 1j, 1j
                basis.append(e)
    return basis


def random_algebra_element(sigma: Spectrum, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    coeffs = rng.normal(scale=scale, size=sum(m * m for m in sigma.multiplicities))
    return sum(c * b for c, b in zip(coeffs, gauge_algebra_basis(sigma)))


def lie_exp(xi) -> np.ndarray:
    """exp(xi) for xi in u(sigma); the result lies in U(sigma)."""
    return expm(np.asarray(xi, dtype=complex))


def retract(sigma: Spectrum, m) -> np.ndarray:
    """Frobenius-nearest point of S(sigma) to ``m``.

    With M P^{1/2} = W S Z^dagger (thin SVD) the nearest point is
    W Z^dagger P^{1/2}: every point of S(sigma) is Q P^{1/2} with Q an
    isometry, and |Q P^{1/2}| is constant, so the problem reduces to the
    orthogonal Procrustes problem. Works on stacks of matrices.
    """
    m = np.asarray(m, dtype=complex)
    sqrt_p = np.sqrt(sigma.p)
    w, s, zh = np.linalg.svd(m * sqrt_p, full_matrices=False)
    if np.any(s[..., -1] < RETRACT_SV_MIN):
        raise RetractionError(
            f"rank-deficient input to retraction (smallest singular value {np.min(s[..., -1]):.3g})"
        )
    return (w @ zh) * sqrt_p


def polar_unitary(b) -> np.ndarray:
    """Unitary polar factor of a square matrix (any maximizer of Re tr(U^dagger B))."""
    w, _, zh = np.linalg.svd(b)
    return w @ zh


def best_gauge(sigma: Spectrum, b) -> np.ndarray:
    """argmax over U in U(sigma) of Re tr(U^dagger B), block by block."""
    u = np.zeros((sigma.k, sigma.k), dtype=complex)
    for blk in sigma.blocks:
        u[blk, blk] = polar_unitary(b[blk, blk])
    return u


def uhlmann_tangent_intersection(psi, x) -> tuple[np.ndarray, float]:
    """Least-squares part of ``x`` satisfying tangency and Uhlmann horizontality together.

    Builds the real-linear map X -> (psi^dagger X + X^dagger psi,
    psi^dagger X - X^dagger psi) and projects ``x`` onto its kernel with the
    pseudo-inverse. Returns the projected matrix and the smallest singular
    value of the map (positive iff the kernel is trivial).
    """
    psi = np.asarray(psi, dtype=complex)
    n, k = psi.shape
    cols = []
    for j in range(2 * n * k):
        e = np.zeros(2 * n * k)
        e[j] = 1.0
        cols.append(_uhlmann_map(psi, e[: n * k].reshape(n, k) + 1j * e[n * k :].reshape(n, k)))
    mat = np.array(cols).T
    vec = np.concatenate([np.real(x).ravel(), np.imag(x).ravel()])
    resid = vec - np.linalg.pinv(mat, rcond=1e-13) @ (mat @ vec)
    smin = np.linalg.svd(mat, compute_uv=False).min()
    return resid[: n * k].reshape(n, k) + 1j * resid[n * k :].reshape(n, k), float(smin)


def _uhlmann_map(psi, x) -> np.ndarray:
    s = dagger(psi) @ x
    plus, minus = s + dagger(s), s - dagger(s)
    return np.concatenate([plus.real.ravel(), plus.imag.ravel(), minus.real.ravel(), minus.imag.ravel()])
