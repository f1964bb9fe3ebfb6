"""Ellipsoid-block bodies and the block size m0(eta).

The body is

    D = {v : (1/m) sum_{i in I_j} <X_i, v>^2 <= 1 + eta  for at least k blocks j}

with ``k = ceil(0.9 n)``. Block ``j`` only enters through its second-moment
matrix ``G_j = (1/m) sum_{i in I_j} X_i X_i^T`` (the block statistic is
``v^T G_j v``), so bodies store the ``n`` Gram matrices instead of the
``N = n m`` raw vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, sample_batch
from .rng import RngStream, as_generator
from .slab import BodyError, ceil_count

MIN_BLOCKS = 10
MIN_M0_TRIALS = 3000
M0_FAILURE_LEVEL = 0.01
_CHUNK_ROWS = 1 << 19
_DIRECTION_CHUNK = 256


def block_statistic(block, v) -> float:
    """(1/m) sum_i <X_i, v>^2 over the raw vectors of one block."""
    x = np.asarray(block, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] == 0:
        raise BodyError("block is empty")
    v = np.asarray(v, dtype=float)
    if v.shape != (x.shape[1],):
        raise BodyError(f"dimension mismatch: block vectors in R^{x.shape[1]}, v has shape {v.shape}")
    proj = x @ v
    return float(np.mean(proj * proj))


def gram_blocks(samples, m: int) -> tuple[np.ndarray, int]:
    """Per-block second-moment matrices of consecutive blocks; returns (grams, dropped)."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[0] // m
    blocks = x[: n * m].reshape(n, m, x.shape[1])
    return np.matmul(blocks.transpose(0, 2, 1), blocks) / m, x.shape[0] - n * m


def sample_block_grams(spec: DistributionSpec, n_blocks: int, m: int, rng, chunk_rows: int = _CHUNK_ROWS) -> np.ndarray:
    """Gram matrices of ``n_blocks`` fresh blocks of ``m`` draws, generated in chunks."""
    gen = as_generator(rng)
    d = spec.d
    out = np.empty((n_blocks, d, d))
    if m <= chunk_rows:
        per = max(1, chunk_rows // m)
        j = 0
        while j < n_blocks:
            b = min(per, n_blocks - j)
            x = sample_batch(spec, b * m, gen).reshape(b, m, d)
            out[j : j + b] = np.matmul(x.transpose(0, 2, 1), x) / m
            j += b
        return out
    for j in range(n_blocks):
        acc = np.zeros((d, d))
        left = m
        while left > 0:
            s = min(chunk_rows, left)
            x = sample_batch(spec, s, gen)
            acc += x.T @ x
            left -= s
        out[j] = acc / m
    return out


def quadratic_forms(grams: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """``q[j, p] = u_p^T G_j u_p`` for grams (n, d, d) and directions (P, d)."""
    n, d, _ = grams.shape
    flat = grams.reshape(n * d, d)
    out = np.empty((n, directions.shape[0]))
    for lo in range(0, directions.shape[0], _DIRECTION_CHUNK):
        u = directions[lo : lo + _DIRECTION_CHUNK]
        gu = (flat @ u.T).reshape(n, d, u.shape[0])
        out[:, lo : lo + _DIRECTION_CHUNK] = np.einsum("jdp,pd->jp", gu, u)
    return out


@dataclass(frozen=True, eq=False)
class EllipsoidBody:
    grams: np.ndarray  # (n, d, d)
    m: int
    eta: float
    k: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.grams, dtype=float)
        if g.ndim != 3 or g.shape[1] != g.shape[2] or g.shape[0] == 0:
            raise BodyError(f"grams must be an (n, d, d) array, got shape {g.shape}")
        if not 1 <= self.k <= g.shape[0]:
            raise BodyError(f"required count k={self.k} outside [1, {g.shape[0]}]")
        g.setflags(write=False)
        object.__setattr__(self, "grams", g)

    @property
    def n(self) -> int:
        return self.grams.shape[0]

    @property
    def d(self) -> int:
        return self.grams.shape[1]

    @property
    def level(self) -> float:
        return 1.0 + self.eta

    @property
    def N(self) -> int:
        return self.n * self.m

    def statistics(self, points) -> np.ndarray:
        """Block statistics, shape (n, P)."""
        return quadratic_forms(self.grams, _as_points(points, self.d))

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.d,):
            raise BodyError(f"dimension mismatch: expected a vector of length {self.d}, got shape {v.shape}")
        return bool(self.contains_many(v[None, :])[0])

    def contains_many(self, points) -> np.ndarray:
        q = self.statistics(points)
        return np.count_nonzero(q <= self.level, axis=0) >= self.k

    def radial(self, u) -> float:
        return float(self.radial_many(np.asarray(u, dtype=float)[None, :])[0])

    def radial_many(self, directions) -> np.ndarray:
        us = _as_points(directions, self.d)
        if np.any(~np.any(us != 0, axis=1)):
            raise BodyError("radial function is undefined at the zero direction")
        q = np.partition(self.statistics(us), self.k - 1, axis=0)[self.k - 1]
        with np.errstate(divide="ignore"):
            return np.where(q > 0, np.sqrt(self.level / np.where(q > 0, q, 1.0)), np.inf)


def _check_eta(eta: float) -> None:
    if not 0 < eta < 0.25:
        raise BodyError(f"eta out of range: need 0 < eta < 1/4, got {eta}")


def build_ellipsoid_body(samples, m: int, eta: float) -> EllipsoidBody:
    _check_eta(eta)
    if int(m) != m or m < 1:
        raise BodyError(f"block size m must be a positive integer, got {m}")
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] < m:
        raise BodyError(f"too few samples: need at least m={m}, got {x.shape[0] if x.ndim == 2 else 0}")
    n = x.shape[0] // m
    if n < MIN_BLOCKS:
        raise BodyError(f"too few samples: {x.shape[0]} samples give n={n} blocks of size {m}, need n >= {MIN_BLOCKS}")
    grams, dropped = gram_blocks(x, m)
    return EllipsoidBody(grams, int(m), float(eta), ceil_count(0.9 * n), {"dropped": dropped})


def sample_ellipsoid_body(spec: DistributionSpec, n: int, m: int, eta: float, rng) -> EllipsoidBody:
    """Draw ``n * m`` samples of ``spec`` and build the body without holding them in memory."""
    _check_eta(eta)
    if n < MIN_BLOCKS:
        raise BodyError(f"need n >= {MIN_BLOCKS} blocks, got {n}")
    grams = sample_block_grams(spec, int(n), int(m), rng)
    return EllipsoidBody(grams, int(m), float(eta), ceil_count(0.9 * n), {"dropped": 0})


@dataclass(frozen=True)
class M0Estimate:
    eta: float
    m0: int | None  # None when no candidate qualified
    failure_probabilities: dict[int, float]
    trials: int
    directions: int

    @property
    def attained(self) -> bool:
        return self.m0 is not None

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "m0": self.m0,
            "attained": self.attained,
            "trials": self.trials,
            "directions": self.directions,
            "failure_probabilities": {str(m): p for m, p in self.failure_probabilities.items()},
        }


def m0_failure_rates(grams: np.ndarray, directions: np.ndarray, eta: float) -> np.ndarray:
    """Per-direction frequency of |v^T G v - 1| >= eta/10 over the given blocks."""
    q = quadratic_forms(grams, directions)
    return np.mean(np.abs(q - 1.0) >= eta / 10.0, axis=0)


def estimate_m0(
    spec: DistributionSpec,
    eta: float,
    candidates,
    trials: int,
    directions: int,
    rng: RngStream,
    stop_early: bool = True,
) -> M0Estimate:
    """Smallest candidate m whose worst-direction failure rate is at most 0.01.

    The failure event for one block of size m and one direction v with
    ``E<X, v>^2 = 1`` is ``|(1/m) sum <X_i, v>^2 - 1| >= eta/10``. Each
    candidate gets its own child stream, so its estimate does not depend on
    which other candidates were evaluated.
    """
    from .verifier import sample_l2_sphere_directions

    cands = [int(c) for c in candidates]
    if not cands or any(c < 1 for c in cands) or any(a >= b for a, b in zip(cands, cands[1:])):
        raise ValueError(f"candidates must be strictly ascending positive integers, got {list(candidates)}")
    if trials < MIN_M0_TRIALS:
        raise ValueError(
            f"trials={trials} cannot resolve a 0.01 failure rate; need at least {MIN_M0_TRIALS}"
        )
    if directions < 1:
        raise ValueError(f"directions must be >= 1, got {directions}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not isinstance(rng, RngStream):
        raise TypeError("estimate_m0 needs an RngStream so candidates get independent child streams")

    dirs = sample_l2_sphere_directions(spec.covariance, directions, rng.spawn(1 << 32))
    table: dict[int, float] = {}
    m0 = None
    for index, m in enumerate(cands):
        grams = sample_block_grams(spec, trials, m, rng.spawn(index))
        table[m] = float(np.max(m0_failure_rates(grams, dirs, eta)))
        if m0 is None and table[m] <= M0_FAILURE_LEVEL:
            m0 = m
            if stop_early:
                break
    return M0Estimate(float(eta), m0, table, int(trials), int(directions))


def _as_points(points, d: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != d:
        raise BodyError(f"dimension mismatch: expected points in R^{d}, got shape {pts.shape}")
    return pts
