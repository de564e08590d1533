"""Truncated number-basis bridge and optimal-discrimination oracles.

This is a desk-scale validation tool: Gaussian states produced by the engine
are converted to density matrices in a truncated Fock basis, on which the
one-shot Helstrom error probability and the Chernoff exponent are evaluated by
direct eigendecomposition.  It is intentionally limited to at most two modes
and modest cutoffs; the asymptotic claims of the analytic bounds are checked
elsewhere.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .gaussian import GaussianState, phase_sensitive_correlation

HERMITICITY_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-10
MAX_CUTOFF = 40


@dataclass(frozen=True)
class FockOperator:
    """Density operator in a truncated number basis.

    dimension is the per-mode cutoff plus one; matrix has shape
    dimension**n_modes square; trace_deficit reports 1 - trace lost to the
    truncation.
    """

    n_modes: int
    dimension: int
    matrix: np.ndarray
    trace_deficit: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.dimension**self.n_modes
        if m.shape != (d, d):
            raise ValueError(f"matrix must be {d}x{d}, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_ATOL:
            raise ValueError("density matrix must be Hermitian")
        object.__setattr__(self, "matrix", m)


def _require_density(rho: FockOperator) -> np.ndarray:
    ev = np.linalg.eigvalsh(rho.matrix)
    if np.min(ev) < EIGENVALUE_FLOOR:
        raise ValueError(f"operator is not positive semidefinite: min eig {np.min(ev)}")
    return rho.matrix


def _ladder(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


def _unitary_from_antihermitian(K: np.ndarray) -> np.ndarray:
    """exp(K) for anti-Hermitian K via eigendecomposition of iK."""
    lam, V = np.linalg.eigh(1j * K)
    return (V * np.exp(-1j * lam)) @ V.conj().T


def _thermal_diag(nbar: float, dim: int) -> np.ndarray:
    if nbar <= 0.0:
        d = np.zeros(dim)
        d[0] = 1.0
        return d
    n = np.arange(dim)
    return np.exp(n * math.log(nbar) - (n + 1) * math.log(nbar + 1.0))


def _single_mode_fock(state: GaussianState, dim: int) -> np.ndarray:
    cov = state.cov
    nu = math.sqrt(max(np.linalg.det(cov), 0.25))
    evals, evecs = np.linalg.eigh(cov)
    # squeeze magnitude from the ratio of principal variances
    r = 0.25 * math.log(evals[1] / evals[0]) if evals[0] > 0 else 0.0
    psi = math.atan2(evecs[1, 1], evecs[0, 1])  # orientation of the major axis

    rho = np.diag(_thermal_diag(nu - 0.5, dim)).astype(complex)
    a = _ladder(dim)
    if abs(r) > 1e-14:
        # anti-squeeze x by r, then rotate the major axis up to angle psi
        K = 0.5 * r * (a.conj().T @ a.conj().T - a @ a)
        S = _unitary_from_antihermitian(K)
        rho = S @ rho @ S.conj().T
        phases = np.exp(1j * psi * np.arange(dim))
        rho = (phases[:, None] * rho) * np.conj(phases)[None, :]
    alpha = (state.mean[0] + 1j * state.mean[1]) / math.sqrt(2.0)
    if abs(alpha) > 1e-14:
        K = alpha * a.conj().T - np.conj(alpha) * a
        D = _unitary_from_antihermitian(K)
        rho = D @ rho @ D.conj().T
    return rho


def _two_mode_fock(state: GaussianState, dim: int) -> np.ndarray:
    if np.max(np.abs(state.mean)) > 1e-10:
        raise ValueError("two-mode conversion supports zero-mean states only")
    cov = state.cov
    A = cov[0:2, 0:2]
    B = cov[2:4, 2:4]
    a_val = 0.5 * (A[0, 0] + A[1, 1])
    b_val = 0.5 * (B[0, 0] + B[1, 1])
    scale = max(1.0, a_val, b_val)
    c = phase_sensitive_correlation(state, 0, 1)
    C_expect = np.array([[c.real, c.imag], [c.imag, -c.real]])
    if (
        np.max(np.abs(A - a_val * np.eye(2))) > 1e-9 * scale
        or np.max(np.abs(B - b_val * np.eye(2))) > 1e-9 * scale
        or np.max(np.abs(cov[0:2, 2:4] - C_expect)) > 1e-9 * scale
    ):
        raise ValueError(
            "two-mode conversion supports phase-insensitive marginals with a "
            "single phase-sensitive cross-correlation (the channel/receiver "
            "pipeline class)"
        )
    cmag = abs(c)
    gamma = cmath.phase(c) if cmag > 0 else 0.0

    # decompose as local phase x two-mode squeeze acting on a thermal product
    sigma = math.sqrt(max((a_val + b_val) ** 2 - 4.0 * cmag * cmag, 1e-30))
    nu1 = 0.5 * (sigma + (a_val - b_val))
    nu2 = 0.5 * (sigma - (a_val - b_val))
    r = 0.5 * math.atanh(min(2.0 * cmag / (a_val + b_val), 1.0 - 1e-16))

    d1 = _thermal_diag(max(nu1 - 0.5, 0.0), dim)
    d2 = _thermal_diag(max(nu2 - 0.5, 0.0), dim)
    rho = np.diag(np.kron(d1, d2)).astype(complex)
    if r > 1e-14:
        a = _ladder(dim)
        eye = np.eye(dim, dtype=complex)
        a0 = np.kron(a, eye)
        a1 = np.kron(eye, a)
        K = r * (a0.conj().T @ a1.conj().T - a0 @ a1)
        U = _unitary_from_antihermitian(K)
        rho = U @ rho @ U.conj().T
    if cmag > 0 and abs(gamma) > 1e-14:
        # restore the cross-correlation phase on mode 0: <a0 a1> -> e^{i gamma} |c|
        n0 = np.kron(np.arange(dim), np.ones(dim))
        phases = np.exp(1j * gamma * n0)
        rho = (phases[:, None] * rho) * np.conj(phases)[None, :]
    return rho


def gaussian_to_fock(state: GaussianState, n_max: int) -> FockOperator:
    """Convert a Gaussian state to a truncated number-basis density matrix.

    Supports single-mode states (with displacement and squeezing) and the
    zero-mean two-mode family produced by the channel and receiver pipeline.
    The reported trace deficit is the probability weight beyond the cutoff.
    """
    if state.n_modes > 2:
        raise ValueError("conversion supports at most two modes")
    if n_max < 1 or n_max > MAX_CUTOFF:
        raise ValueError(f"n_max must lie in [1, {MAX_CUTOFF}], got {n_max}")
    dim = n_max + 1
    if state.n_modes == 1:
        rho = _single_mode_fock(state, dim)
    else:
        rho = _two_mode_fock(state, dim)
    rho = 0.5 * (rho + rho.conj().T)
    deficit = float(1.0 - np.trace(rho).real)
    return FockOperator(
        n_modes=state.n_modes, dimension=dim, matrix=rho, trace_deficit=deficit
    )


def helstrom_oracle(rho0: FockOperator, rho1: FockOperator) -> float:
    """One-shot optimal error probability for equal priors.

    P = (1 - D)/2 where D is the trace distance, half the sum of the absolute
    eigenvalues of the difference.
    """
    m0 = _require_density(rho0)
    m1 = _require_density(rho1)
    if m0.shape != m1.shape:
        raise ValueError("operators must share a truncation dimension")
    ev = np.linalg.eigvalsh(m0 - m1)
    distance = 0.5 * float(np.sum(np.abs(ev)))
    return max(0.0, 0.5 * (1.0 - distance))


def _overlap_curve(rho0: FockOperator, rho1: FockOperator):
    """Returns f(s) = Tr(rho0^s rho1^{1-s}) as a cheap callable."""
    m0 = _require_density(rho0)
    m1 = _require_density(rho1)
    if m0.shape != m1.shape:
        raise ValueError("operators must share a truncation dimension")
    lam0, v0 = np.linalg.eigh(m0)
    lam1, v1 = np.linalg.eigh(m1)
    floor0 = 1e-14 * max(np.max(lam0), 1e-300)
    floor1 = 1e-14 * max(np.max(lam1), 1e-300)
    lam0 = np.where(lam0 > floor0, lam0, 0.0)
    lam1 = np.where(lam1 > floor1, lam1, 0.0)
    w = np.abs(v0.conj().T @ v1) ** 2

    def powers(lam: np.ndarray, s: float) -> np.ndarray:
        out = np.zeros_like(lam)
        nz = lam > 0.0
        out[nz] = np.exp(s * np.log(lam[nz]))
        return out

    def f(s: float) -> float:
        return float(powers(lam0, s) @ w @ powers(lam1, 1.0 - s))

    return f


def chernoff_exponent_oracle(
    rho0: FockOperator, rho1: FockOperator, s_grid: int = 33
) -> float:
    """Chernoff exponent -log min_{0<=s<=1} Tr(rho0^s rho1^{1-s}).

    The overlap is scanned on a uniform grid and refined by golden-section
    search around the best grid point.
    """
    if s_grid < 3:
        raise ValueError("need at least a 3-point grid")
    f = _overlap_curve(rho0, rho1)
    grid = np.linspace(0.0, 1.0, s_grid)
    vals = [f(s) for s in grid]
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, s_grid - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > 1e-10:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    best = min(min(vals), f1, f2)
    return -math.log(max(best, 1e-300))
