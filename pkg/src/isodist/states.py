"""Density matrices, spectra and the canonical purification of a state.

Matrices are plain complex ``numpy`` arrays. The ``check_*`` helpers validate
an array against the invariants of its role and return it as a complex
array; they raise rather than repair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .errors import InvalidStateError, NotIsospectralError, RankAmbiguityError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
RANK_TOL = 1e-10
# Consecutive eigenvalues closer than this are treated as one degenerate block.
DEGENERACY_TOL = 1e-9


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def _group_runs(values: np.ndarray, tol: float) -> tuple[int, ...]:
    runs = [1]
    for prev, cur in zip(values[:-1], values[1:]):
        if prev - cur <= tol:
            runs[-1] += 1
        else:
            runs.append(1)
    return tuple(runs)


@dataclass(frozen=True)
class Spectrum:
    """Non-increasing list of the positive eigenvalues of a state.

    Values are stored exactly as given. Multiplicities are the lengths of the
    runs of (numerically) equal values.
    """

    values: tuple[float, ...]
    multiplicities: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise InvalidStateError("spectrum must contain at least one value")
        if not np.all(np.isfinite(vals)):
            raise InvalidStateError("spectrum values must be finite")
        if np.any(vals <= 0):
            raise InvalidStateError(f"spectrum values must be positive, got {vals}")
        if np.any(np.diff(vals) > 0):
            raise InvalidStateError(f"spectrum must be non-increasing, got {vals}")
        if abs(vals.sum() - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"spectrum must sum to 1, got {vals.sum()!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))
        object.__setattr__(self, "multiplicities", _group_runs(vals, DEGENERACY_TOL))

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def blocks(self) -> list[slice]:
        """Index ranges of the multiplicity blocks, largest eigenvalue first."""
        out, start = [], 0
        for m in self.multiplicities:
            out.append(slice(start, start + m))
            start += m
        return out

    def block_labels(self) -> np.ndarray:
        """Block index of every position 0..k-1."""
        return np.repeat(np.arange(len(self.multiplicities)), self.multiplicities)


def matrix_P(sigma: Spectrum) -> np.ndarray:
    return np.diag(sigma.p)


def block_projectors(sigma: Spectrum) -> list[np.ndarray]:
    out = []
    for blk in sigma.blocks:
        e = np.zeros(sigma.k)
        e[blk] = 1.0
        out.append(np.diag(e))
    return out


def block_mask(sigma: Spectrum) -> np.ndarray:
    """Boolean k x k mask that is True on the diagonal multiplicity blocks."""
    labels = sigma.block_labels()
    return labels[:, None] == labels[None, :]


def _as_square(a, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidStateError(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidStateError(f"{what} has non-finite entries")
    return a


def check_hermitian(h, what: str = "Hamiltonian") -> np.ndarray:
    h = _as_square(h, what)
    dev = np.max(np.abs(h - dagger(h)))
    if dev > HERMITIAN_TOL:
        raise InvalidStateError(f"{what} is not Hermitian (max deviation {dev:.3g})")
    return h


def check_density(rho) -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD and unit trace."""
    rho = check_hermitian(rho, "density matrix")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(rho).min()
    if lam_min < -HERMITIAN_TOL:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam_min:.3g}")
    return rho


def _sorted_eigh(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(rho)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def spectrum_of(rho, rank_tol: float = RANK_TOL) -> Spectrum:
    """Positive spectrum of ``rho``; eigenvalues at or below ``rank_tol`` are dropped.

    Raises RankAmbiguityError when a retained eigenvalue lies within
    ``rank_tol`` of the cutoff, i.e. the numerical rank is ill-conditioned.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    rho = check_density(rho)
    w, _ = _sorted_eigh(rho)
    kept = w[w > rank_tol]
    if kept.size and kept[-1] <= 2 * rank_tol:
        raise RankAmbiguityError(
            f"eigenvalue {kept[-1]:.3g} is within rank_tol={rank_tol:g} of the cutoff"
        )
    # the trace check in Spectrum sees the retained mass only
    return _spectrum_unchecked(kept)


def _spectrum_unchecked(values: np.ndarray) -> Spectrum:
    # Eigensolver output can miss unit sum by a few ulps times n; Spectrum
    # validates to 1e-12, which a valid density matrix always satisfies.
    try:
        return Spectrum(tuple(values))
    except InvalidStateError as exc:
        raise RankAmbiguityError(str(exc)) from exc


def is_isospectral(rho, sigma: Spectrum, tol: float = 1e-10) -> bool:
    w, _ = _sorted_eigh(np.asarray(rho, dtype=complex))
    n = w.size
    if n < sigma.k:
        return False
    target = np.zeros(n)
    target[: sigma.k] = sigma.p
    return bool(np.max(np.abs(w - target)) <= tol)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest-modulus entry real positive; argmax picks the lowest index on ties
    idx = np.argmax(np.abs(v) - 1e-12 * np.arange(v.shape[0])[:, None], axis=0)
    piv = v[idx, np.arange(v.shape[1])]
    return v * (np.abs(piv) / piv)[None, :]


def canonical_purification(rho, sigma: Spectrum, tol: float = 1e-10) -> np.ndarray:
    """Purification sum_i sqrt(p_i) |e_i><f_i| built from the eigenvectors of ``rho``.

    Eigenvectors are ordered by non-increasing eigenvalue and each one is
    rotated so its largest-modulus entry is real and positive.
    """
    rho = check_density(rho)
    if not is_isospectral(rho, sigma, tol):
        raise NotIsospectralError("state is not isospectral to the given spectrum")
    _, v = _sorted_eigh(rho)
    vecs = _fix_phase(v[:, : sigma.k])
    return vecs * np.sqrt(sigma.p)[None, :]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_isospectral(sigma: Spectrum, n: int, seed) -> np.ndarray:
    """U diag(sigma, 0, ...) U^dagger for a Haar unitary U drawn from ``seed``.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if n < sigma.k:
        raise InvalidStateError(f"dimension n={n} is smaller than the rank k={sigma.k}")
    rng = np.random.default_rng(seed)
    u = haar_unitary(n, rng)
    d = np.zeros(n)
    d[: sigma.k] = sigma.p
    rho = (u * d[None, :]) @ dagger(u)
    return 0.5 * (rho + dagger(rho))


def trace_distance(rho0, rho1) -> float:
    rho0, rho1 = np.asarray(rho0, dtype=complex), np.asarray(rho1, dtype=complex)
    if rho0.shape != rho1.shape:
        raise InvalidStateError(f"dimension mismatch: {rho0.shape} vs {rho1.shape}")
    return float(0.5 * np.linalg.svd(rho0 - rho1, compute_uv=False).sum())
