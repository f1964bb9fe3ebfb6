"""Empirical certification of ellipsoid approximations.

Directions are drawn on the L2 sphere ``S = {v : <Tv, v> = 1}``, where the
true ellipsoid has radius exactly 1, so a body's radial value at ``u`` is
directly the ratio between the body and the ellipsoid along ``u``. If every
sampled ratio lies in ``[r_min, r_max]`` then, restricted to those directions,
``r_min * B`` sits inside the body and the body inside ``r_max * B``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .distributions import DistributionSpec, MarginalSpec, block_average, sample_batch
from .linalg import DEFAULT_SETTINGS, NotInvertibleError, NumericSettings, psd_pow
from .normal import normal_cdf
from .rng import RngStream, as_generator

MIN_CONDITION_TRIALS = 10_000
MIN_PSI_TRIALS = 100_000
MIN_SUP_TRIALS = 1_000


def _inverse_root(T, settings: NumericSettings) -> np.ndarray:
    try:
        return psd_pow(T, -0.5, settings)
    except NotInvertibleError as exc:
        raise NotInvertibleError(f"singular covariance: {exc}") from None


def sample_l2_sphere_directions(T, count: int, rng, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """``count`` directions ``u = T^{-1/2} w`` with ``w`` uniform on the unit sphere."""
    root = _inverse_root(T, settings)
    gen = as_generator(rng)
    w = gen.standard_normal((int(count), root.shape[0]))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return w @ root


def sample_l2_sphere_direction(T, rng, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    return sample_l2_sphere_directions(T, 1, rng, settings)[0]


def normalize_to_l2_sphere(T, points) -> np.ndarray:
    """Rescale each non-zero row to ``<Tv, v> = 1``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    q = np.einsum("pd,de,pe->p", pts, np.asarray(T, dtype=float), pts)
    if np.any(q <= 0):
        raise ValueError("cannot normalise a zero direction onto the L2 sphere")
    return pts / np.sqrt(q)[:, None]


@dataclass(frozen=True)
class Offender:
    index: int
    ratio: float
    direction: list[float]


@dataclass(frozen=True)
class ApproximationReport:
    direction_count: int
    min_ratio: float
    max_ratio: float
    infinite_radial_count: int
    seed: int | None
    stream_id: int | None
    worst_offenders: list[Offender] = field(default_factory=list)

    @property
    def inner_scale(self) -> float:
        """Largest c with c*B inside the body on the sampled directions."""
        return self.min_ratio

    @property
    def outer_scale(self) -> float:
        """Smallest C with the body inside C*B on the sampled directions (inf if unbounded)."""
        return math.inf if self.infinite_radial_count else self.max_ratio

    @property
    def implied_eta(self) -> float:
        """Smallest eta with (1 - eta) K in B in (1 + eta) K on the sampled directions."""
        if self.infinite_radial_count:
            return math.inf
        return max(0.0, 1.0 - 1.0 / self.max_ratio, 1.0 / self.min_ratio - 1.0)

    @property
    def spread(self) -> float:
        return self.outer_scale / self.min_ratio

    def to_dict(self) -> dict:
        out = asdict(self)
        out["implied_eta"] = self.implied_eta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ApproximationReport":
        data = {k: v for k, v in data.items() if k != "implied_eta"}
        data["worst_offenders"] = [Offender(**o) for o in data.get("worst_offenders", [])]
        return cls(**data)


def _evaluate_radial(radial_fn, directions: np.ndarray) -> np.ndarray:
    many = getattr(radial_fn, "radial_many", None)
    if many is not None:
        return np.asarray(many(directions), dtype=float)
    return np.array([float(radial_fn(u)) for u in directions])


def certify_approximation(
    radial_fn,
    T,
    directions: int,
    rng,
    extra_directions=None,
    offenders: int = 10,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> ApproximationReport:
    """Compare a star-shaped body with the ellipsoid ``{<Tv, v> <= 1}``.

    ``radial_fn`` is either a body exposing ``radial_many`` or a callable
    ``u -> r(u)``. ``extra_directions`` (any non-zero vectors) are rescaled
    onto the L2 sphere and checked after the random ones. Infinite radial
    values are counted separately and left out of ``max_ratio``.
    """
    if directions < 1 and extra_directions is None:
        raise ValueError(f"directions must be >= 1, got {directions}")
    us = sample_l2_sphere_directions(T, directions, rng, settings) if directions > 0 else np.empty((0, np.shape(T)[0]))
    if extra_directions is not None:
        us = np.vstack([us, normalize_to_l2_sphere(T, extra_directions)])
    ratios = _evaluate_radial(radial_fn, us)
    if np.any(~(ratios > 0)):
        bad = int(np.flatnonzero(~(ratios > 0))[0])
        raise ValueError(f"radial function returned a non-positive value {ratios[bad]} at direction {bad}")
    finite = np.isfinite(ratios)
    n_inf = int(np.count_nonzero(~finite))
    fin = ratios[finite]
    min_ratio = float(fin.min()) if fin.size else math.inf
    max_ratio = float(fin.max()) if fin.size else math.inf

    deviation = np.where(finite, np.abs(np.log(np.where(finite, ratios, 1.0))), np.inf)
    worst = np.argsort(-deviation, kind="stable")[:offenders]
    top = [Offender(int(i), float(ratios[i]), us[i].tolist()) for i in worst]
    seed = stream = None
    if isinstance(rng, RngStream):
        seed, stream = int(rng.seed), int(rng.stream_id)
    return ApproximationReport(int(us.shape[0]), min_ratio, max_ratio, n_inf, seed, stream, top)


@dataclass(frozen=True)
class ConditionReport:
    """Monte Carlo check of the two marginal conditions on sampled directions of S.

    condition 1: |Pr(|<Z, v>| <= alpha) - beta| <= eta
    condition 2: Pr(|<Z, v>| in [alpha - eps, alpha]) >= gamma * eps

    The condition-2 mass is two-sided (both tails of <Z, v> fall in the
    interval); for the standard gaussian with eps = 0.1 it is
    2 (Phi(alpha) - Phi(alpha - 0.1)) ~= 0.0656, so gamma_hat ~= 0.656.
    """

    alpha: float
    beta: float
    m: int
    trials: int
    directions: int
    beta_hat_min: float
    beta_hat_max: float
    condition1_deviation: float
    condition1_stderr: float
    mass_by_eps: dict[float, float]
    gamma_hat: float

    @property
    def beta_hat_range(self) -> tuple[float, float]:
        return self.beta_hat_min, self.beta_hat_max

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mass_by_eps"] = {repr(float(k)): v for k, v in self.mass_by_eps.items()}
        return out


def block_marginals(spec: DistributionSpec, m: int, v: np.ndarray, trials: int, rng) -> np.ndarray:
    """``trials`` draws of <Z, v> with Z the m-block average of spec."""
    gen = as_generator(rng)
    out = np.empty(trials)
    chunk = max(1, (1 << 18) // m)
    for lo in range(0, trials, chunk):
        b = min(chunk, trials - lo)
        z = block_average(sample_batch(spec, b * m, gen), m).vectors
        out[lo : lo + b] = z @ v
    return out


def check_marginal_conditions(
    spec: DistributionSpec,
    m: int,
    alpha: float,
    eps_list,
    directions: int,
    trials: int,
    rng: RngStream,
    beta: float = 0.5,
) -> ConditionReport:
    if trials < MIN_CONDITION_TRIALS:
        raise ValueError(f"trials={trials} is too small; need at least {MIN_CONDITION_TRIALS} per direction")
    eps_list = [float(e) for e in eps_list]
    if any(not 0 < e <= alpha for e in eps_list):
        raise ValueError(f"every eps must lie in (0, alpha], got {eps_list}")
    dirs = sample_l2_sphere_directions(spec.covariance, directions, rng.spawn(1 << 32))
    beta_hat = np.empty(directions)
    masses = np.empty((directions, len(eps_list)))
    for i, v in enumerate(dirs):
        y = np.abs(block_marginals(spec, m, v, trials, rng.spawn(i)))
        inside = y <= alpha
        beta_hat[i] = np.mean(inside)
        for j, e in enumerate(eps_list):
            masses[i, j] = np.mean(inside & (y >= alpha - e))
    stderr = math.sqrt(beta * (1 - beta) / trials)
    min_mass = masses.min(axis=0)
    gamma = float(np.min(masses / np.array(eps_list)[None, :])) if eps_list else math.nan
    return ConditionReport(
        alpha=float(alpha),
        beta=float(beta),
        m=int(m),
        trials=int(trials),
        directions=int(directions),
        beta_hat_min=float(beta_hat.min()),
        beta_hat_max=float(beta_hat.max()),
        condition1_deviation=float(np.max(np.abs(beta_hat - beta))),
        condition1_stderr=stderr,
        mass_by_eps={e: float(mm) for e, mm in zip(eps_list, min_mass)},
        gamma_hat=gamma,
    )


def estimate_abs_median(spec: DistributionSpec, draws: int, rng, v=None) -> float:
    """Monte Carlo median of |<X, v>| for v on the L2 sphere (first coordinate axis, rescaled, by default)."""
    if v is None:
        v = np.zeros(spec.d)
        v[0] = 1.0
    v = normalize_to_l2_sphere(spec.covariance, v)[0]
    gen = as_generator(rng)
    vals = np.empty(draws)
    chunk = 1 << 18
    for lo in range(0, draws, chunk):
        b = min(chunk, draws - lo)
        vals[lo : lo + b] = np.abs(sample_batch(spec, b, gen) @ v)
    return float(np.median(vals))


def kolmogorov_distance(sample) -> float:
    """sup_t |F_n(t) - Phi(t)|, including left limits at the sample points."""
    y = np.sort(np.asarray(sample, dtype=float))
    n = y.size
    phi = normal_cdf(y)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - phi), np.max(phi - (i - 1) / n)))


def estimate_psi(marginal: MarginalSpec, m: int, trials: int, rng) -> float:
    """Kolmogorov distance between the standardised m-sum of the marginal and N(0, 1)."""
    if trials < MIN_PSI_TRIALS:
        raise ValueError(f"trials={trials} is too small; need at least {MIN_PSI_TRIALS}")
    gen = as_generator(rng)
    sigma = math.sqrt(marginal.variance)
    y = np.empty(trials)
    chunk = max(1, (1 << 22) // m)
    for lo in range(0, trials, chunk):
        b = min(chunk, trials - lo)
        y[lo : lo + b] = marginal.sample(gen, (b, m)).sum(axis=1)
    y /= math.sqrt(m) * sigma
    return kolmogorov_distance(y)


@dataclass(frozen=True)
class SupEstimate:
    value: float
    stderr: float
    bound: float  # sqrt(k d)

    def __float__(self) -> float:
        return self.value

    def within_bound(self, n_stderr: float = 3.0) -> bool:
        return self.value <= self.bound + n_stderr * self.stderr


def rademacher_sup_estimate(spec: DistributionSpec, k: int, trials: int, rng) -> SupEstimate:
    """Monte Carlo mean of sup_{v in B} |sum_i eps_i <X_i, v>| = ||T^{-1/2} sum_i eps_i X_i||_2."""
    if trials < MIN_SUP_TRIALS:
        raise ValueError(f"trials={trials} is too small; need at least {MIN_SUP_TRIALS}")
    root = _inverse_root(spec.covariance, spec.settings)
    gen = as_generator(rng)
    vals = np.empty(trials)
    chunk = max(1, (1 << 18) // k)
    for lo in range(0, trials, chunk):
        b = min(chunk, trials - lo)
        x = sample_batch(spec, b * k, gen).reshape(b, k, spec.d)
        eps = gen.integers(0, 2, size=(b, k), dtype=np.int8).astype(float) * 2.0 - 1.0
        s = np.einsum("bk,bkd->bd", eps, x) @ root
        vals[lo : lo + b] = np.linalg.norm(s, axis=1)
    return SupEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials)), math.sqrt(k * spec.d))


@dataclass(frozen=True)
class RayBisection:
    radius: float
    unbounded: bool

    def __float__(self) -> float:
        return self.radius


def brute_force_radial(contains_fn: Callable[[np.ndarray], bool], u, t_max: float, abs_tol: float = 1e-10) -> RayBisection:
    """sup{t in [0, t_max] : t*u in K} by bisection, for K star-shaped around 0.

    Bisects until the bracket is below ``abs_tol`` and below 1e-15 relative to
    its lower end (or stops shrinking in floating point), so small radii are
    resolved to full relative precision too.
    """
    u = np.asarray(u, dtype=float)
    if not contains_fn(np.zeros_like(u)):
        raise ValueError("contains_fn rejects the origin; the set is not star-shaped around 0")
    if contains_fn(t_max * u):
        return RayBisection(float(t_max), True)
    lo, hi = 0.0, float(t_max)
    for _ in range(2000):
        width = hi - lo
        if width <= abs_tol and width <= 1e-15 * lo:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if contains_fn(mid * u):
            lo = mid
        else:
            hi = mid
    return RayBisection(lo, False)
