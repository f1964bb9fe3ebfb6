"""The empirical covariance ellipsoid and its deviation diagnostics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .linalg import DEFAULT_SETTINGS, NotInvertibleError, NumericSettings, operator_norm_sym, psd_pow, sym_eig

DIAGNOSTIC_COLUMNS = ("seed", "d", "N", "p", "deviation", "max_norm_term", "moment_term", "truncation_term")


@dataclass(frozen=True, eq=False)
class EmpiricalEllipsoid:
    T_hat: np.ndarray
    N: int

    @property
    def d(self) -> int:
        return self.T_hat.shape[0]

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(v @ self.T_hat @ v <= 1.0)

    def radial(self, u) -> float:
        return radial_empirical(self, u)

    def radial_many(self, directions) -> np.ndarray:
        us = np.asarray(directions, dtype=float)
        if np.any(~np.any(us != 0, axis=1)):
            raise ValueError("radial function is undefined at the zero direction")
        q = np.sum((us @ self.T_hat) * us, axis=1)
        with np.errstate(divide="ignore"):
            return np.where(q > 0, 1.0 / np.sqrt(np.where(q > 0, q, 1.0)), np.inf)


def empirical_covariance(samples) -> EmpiricalEllipsoid:
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError(f"empirical covariance needs a non-empty (N, d) sample array, got shape {x.shape}")
    t_hat = x.T @ x / x.shape[0]
    t_hat = 0.5 * (t_hat + t_hat.T)
    t_hat.setflags(write=False)
    return EmpiricalEllipsoid(t_hat, x.shape[0])


def radial_empirical(e: EmpiricalEllipsoid, u) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != (e.d,):
        raise ValueError(f"dimension mismatch: expected a vector of length {e.d}, got shape {u.shape}")
    if not np.any(u != 0):
        raise ValueError("radial function is undefined at the zero direction")
    q = float(u @ e.T_hat @ u)
    return math.inf if q <= 0 else 1.0 / math.sqrt(q)


def isotropize(samples, T, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Rows Y_i = T^{-1/2} X_i."""
    try:
        root = psd_pow(T, -0.5, settings)
    except NotInvertibleError as exc:
        raise NotInvertibleError(f"singular covariance: {exc}") from None
    return np.asarray(samples, dtype=float) @ root


def isotropic_deviation(samples, T, settings: NumericSettings = DEFAULT_SETTINGS) -> float:
    """||Id - (1/N) sum Y_i Y_i^T||_{2->2} with Y_i = T^{-1/2} X_i."""
    y = isotropize(samples, T, settings)
    t_y = empirical_covariance(y).T_hat
    return operator_norm_sym(np.eye(t_y.shape[0]) - t_y, settings)


@dataclass(frozen=True)
class DeviationDiagnostics:
    d: int
    N: int
    p: float
    operator_deviation: float
    max_norm_term: float
    moment_term: float
    truncation_term: float
    # sup_v (1/N) sum <Y_i, v>^2, the largest eigenvalue of the isotropized T_hat
    top_eigenvalue: float

    def row(self, seed: int) -> dict:
        return {
            "seed": seed,
            "d": self.d,
            "N": self.N,
            "p": self.p,
            "deviation": self.operator_deviation,
            "max_norm_term": self.max_norm_term,
            "moment_term": self.moment_term,
            "truncation_term": self.truncation_term,
        }

    def to_dict(self) -> dict:
        return asdict(self)


def moment_term(d: int, N: int, p: float) -> float:
    return (d / N) ** (1.0 - 2.0 / p) * math.log(math.e * N / d) ** 4


def truncation_term(d: int, N: int, p: float) -> float:
    return (d / N) ** (1.0 - 2.0 / min(4.0, p))


def tikhomirov_bound_terms(samples, T, p: float, settings: NumericSettings = DEFAULT_SETTINGS) -> DeviationDiagnostics:
    """The three right-hand terms of the heavy-tailed operator-norm bound, plus the measured deviation.

    The unknown constant in front of the bound is not applied; callers compare
    raw magnitudes.
    """
    if not p > 2:
        raise ValueError(f"moment exponent p must exceed 2, got {p}")
    y = isotropize(samples, T, settings)
    N, d = y.shape
    t_y = empirical_covariance(y).T_hat
    w = sym_eig(t_y, settings).eigenvalues
    deviation = float(max(abs(1.0 - w[0]), abs(1.0 - w[-1])))
    max_norm = float(np.max(np.sum(y * y, axis=1)) / N)
    diag = DeviationDiagnostics(
        d=d,
        N=N,
        p=float(p),
        operator_deviation=deviation,
        max_norm_term=max_norm,
        moment_term=moment_term(d, N, p),
        truncation_term=truncation_term(d, N, p),
        top_eigenvalue=float(w[0]),
    )
    # ||Gamma||^2 >= max_i ||Gamma^* e_i||^2 = (1/N) max_i ||Y_i||^2
    if diag.top_eigenvalue < diag.max_norm_term * (1.0 - 1e-9):
        raise AssertionError(
            f"spectral lower bound violated: top eigenvalue {diag.top_eigenvalue} < max-norm term {diag.max_norm_term}"
        )
    return diag
