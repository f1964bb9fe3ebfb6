"""Dense real symmetric linear algebra.

Everything the geometry needs from a covariance matrix ``T``: its
eigendecomposition, PSD powers (``T^{1/2}`` for sampling, ``T^{-1/2}`` for
isotropization and for the true ellipsoid ``T^{-1/2} B_2^d``), quadratic
forms and the spectral norm.

The eigensolver is a cyclic Jacobi method using the round-robin (parallel)
ordering: each sweep is split into ``d - 1`` rounds of ``d // 2`` disjoint
rotations, and every round is applied to whole rows/columns at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class LinalgError(ValueError):
    pass


class NotPSDError(LinalgError):
    pass


class NotInvertibleError(LinalgError):
    pass


class ConvergenceError(LinalgError):
    pass


@dataclass(frozen=True)
class NumericSettings:
    symmetry_tol: float = 1e-12
    psd_clamp: float = 1e-9          # eigenvalues in [-psd_clamp, 0] are clamped to 0
    invertible_tol: float = 1e-12    # smallest eigenvalue allowed for negative powers
    jacobi_tol: float = 1e-15        # off-diagonal Frobenius mass relative to ||A||_F
    max_sweeps: int = 60
    power_iter_tol: float = 1e-12
    power_iter_max: int = 10_000
    # "jacobi", "lapack", or "auto" (Jacobi up to jacobi_max_dim, LAPACK above)
    eig_backend: str = "auto"
    jacobi_max_dim: int = 64


DEFAULT_SETTINGS = NumericSettings()


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # columns
    sweeps: int = field(default=0, compare=False)

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def as_symmetric(a, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Validate ``a`` as a finite symmetric square matrix and return a read-only copy."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise LinalgError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")
    gap = np.abs(a - a.T)
    if np.any(gap > settings.symmetry_tol * np.maximum(1.0, np.abs(a))):
        raise LinalgError(f"matrix is not symmetric (max |A_ij - A_ji| = {gap.max():.3e})")
    a = 0.5 * (a + a.T)
    a.setflags(write=False)
    return a


def _round_robin(d: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings for one Jacobi sweep; every index pair appears exactly once."""
    players = list(range(d)) + ([-1] if d % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            p, q = players[i], players[size - 1 - i]
            if p < 0 or q < 0:
                continue
            ps.append(min(p, q))
            qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def sym_eig(a, settings: NumericSettings = DEFAULT_SETTINGS) -> SpectralDecomposition:
    a = np.array(as_symmetric(a, settings))
    d = a.shape[0]
    backend = settings.eig_backend
    if backend == "auto":
        backend = "jacobi" if d <= settings.jacobi_max_dim else "lapack"
    if backend == "lapack":
        w, v = np.linalg.eigh(a)
        return SpectralDecomposition(w[::-1].copy(), v[:, ::-1].copy(), 0)
    if backend != "jacobi":
        raise LinalgError(f"unknown eigensolver backend {backend!r}")
    return _jacobi(a, settings)


def _jacobi(a: np.ndarray, settings: NumericSettings) -> SpectralDecomposition:
    d = a.shape[0]
    v = np.eye(d)
    scale = np.linalg.norm(a)
    if d == 1 or scale == 0.0:
        return SpectralDecomposition(np.diag(a).copy(), v, 0)

    rounds = _round_robin(d)
    eye = np.eye(d, dtype=bool)
    target = settings.jacobi_tol * scale
    for sweep in range(1, settings.max_sweeps + 1):
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            app, aqq = a[p, p], a[q, q]
            # stable tan of the rotation angle (Golub & Van Loan 8.4)
            with np.errstate(divide="ignore", invalid="ignore"):
                tau = np.where(active, (aqq - app) / (2.0 * apq), 0.0)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            rp, rq = a[p, :], a[q, :]
            a[p, :], a[q, :] = c[:, None] * rp - s[:, None] * rq, s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p], a[:, q]
            a[:, p], a[:, q] = cp * c - cq * s, cp * s + cq * c
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp, vq = v[:, p], v[:, q]
            v[:, p], v[:, q] = vp * c - vq * s, vp * s + vq * c

        off = math.sqrt(np.sum(a[~eye] ** 2))
        if off <= target:
            break
    else:
        raise ConvergenceError(
            f"Jacobi did not converge in {settings.max_sweeps} sweeps "
            f"(off-diagonal residual {off:.3e}, target {target:.3e})"
        )

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order], sweep)


def psd_pow(a, exponent: float, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """``Q diag(lambda^exponent) Q^T`` for a PSD matrix.

    Eigenvalues in ``[-psd_clamp, 0]`` are treated as zero. A negative exponent
    needs the smallest eigenvalue above ``invertible_tol``.
    """
    dec = sym_eig(a, settings)
    w = dec.eigenvalues
    if w[-1] < -settings.psd_clamp:
        raise NotPSDError(f"matrix is not PSD (smallest eigenvalue {w[-1]:.3e})")
    w = np.maximum(w, 0.0)
    if exponent < 0 and w[-1] <= settings.invertible_tol:
        raise NotInvertibleError(
            f"matrix is not invertible (smallest eigenvalue {w[-1]:.3e}) for exponent {exponent}"
        )
    if exponent == 0:
        powered = np.ones_like(w)
    else:
        powered = w ** exponent
    q = dec.eigenvectors
    out = (q * powered) @ q.T
    return 0.5 * (out + out.T)


def quadratic_form(a, v) -> float:
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or a.shape != (v.shape[0], v.shape[0]):
        raise LinalgError(f"dimension mismatch: matrix {a.shape}, vector {v.shape}")
    return float(v @ a @ v)


def operator_norm_sym(a, settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """Largest absolute eigenvalue, read off the full eigendecomposition."""
    w = sym_eig(a, settings).eigenvalues
    return float(max(abs(w[0]), abs(w[-1])))


def operator_norm_power(a, settings: NumericSettings = DEFAULT_SETTINGS, seed: int = 0) -> float:
    """Power iteration on ``A^2``; sqrt of the dominant Rayleigh quotient."""
    a = as_symmetric(a, settings)
    a2 = a @ a
    x = np.random.default_rng(seed).standard_normal(a.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(settings.power_iter_max):
        y = a2 @ x
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        new = float(x @ y)
        x = y / ny
        if abs(new - lam) <= settings.power_iter_tol * max(abs(new), 1e-300):
            return math.sqrt(max(new, 0.0))
        lam = new
    raise ConvergenceError(
        f"power iteration hit the cap of {settings.power_iter_max} steps (last estimate {math.sqrt(max(lam, 0.0)):.6g})"
    )
