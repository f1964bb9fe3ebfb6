"""Bodies made of slabs: points lying in at least ``k`` of ``n`` slabs.

A slab is ``H_z = {v : |<z, v>| <= theta}``. The body
``K = {v : |<z_j, v>| <= theta for at least k indices j}`` is a union of
intersections of slabs: star-shaped around 0, centrally symmetric, in
general not convex. Along a ray ``t*u`` the slab counts only drop as ``t``
grows, so the radial function is the order statistic

    r(u) = theta / a_(k),   a_(k) = k-th smallest of |<z_j, u>|.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import block_average
from .normal import gaussian_abs_median

SLAB_MODES = ("smoothed", "sharp", "isomorphic", "general")
_DIRECTION_CHUNK = 256


class BodyError(ValueError):
    pass


def ceil_count(x: float) -> int:
    """Ceiling that ignores float noise: (0.5 - 0.05) * 100 gives 45, not 46."""
    return int(math.ceil(round(x, 9)))


@dataclass(frozen=True)
class SlabMode:
    """Construction recipe for a slab body.

    smoothed(m, eta): blocks of m raw samples are averaged first, then
        theta = alpha + eta and k = ceil((1/2 - eta) n).
    sharp(eta): theta = alpha, k = ceil((1/2 - eta) n).
    isomorphic(lam, delta): theta = lam / 2, k = ceil((1 - delta/4) N).
    general(alpha, beta, eta): theta = alpha + eta, k = ceil((beta - eta) n).

    ``alpha`` defaults to the median of |g|; pass it explicitly for bodies
    built from a distribution whose marginal median is different (for
    instance the uniform measure on the sphere).
    """

    kind: str
    eta: float = 0.0
    m: int = 1
    lam: float | None = None
    delta: float | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in SLAB_MODES:
            raise BodyError(f"unknown slab mode {self.kind!r}; expected one of {SLAB_MODES}")
        if self.kind in ("smoothed", "sharp"):
            if not 0 <= self.eta < 0.5:
                raise BodyError(f"eta must lie in [0, 1/2) for {self.kind} bodies, got {self.eta}")
        if self.kind == "smoothed" and (int(self.m) != self.m or self.m < 1):
            raise BodyError(f"block size m must be a positive integer, got {self.m}")
        if self.kind == "isomorphic":
            if self.lam is None or not self.lam > 0:
                raise BodyError(f"isomorphic bodies need lam > 0, got {self.lam}")
            if self.delta is None or not 0 < self.delta < 4:
                raise BodyError(f"isomorphic bodies need 0 < delta < 4, got {self.delta}")
        if self.kind == "general":
            if self.beta is None or not 0 < self.beta <= 1:
                raise BodyError(f"general bodies need 0 < beta <= 1, got {self.beta}")
            if not 0 <= self.eta < self.beta:
                raise BodyError(f"general bodies need 0 <= eta < beta, got eta={self.eta}")
        if self.alpha is not None and not self.alpha > 0:
            raise BodyError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def smoothed(cls, m: int, eta: float, alpha: float | None = None) -> "SlabMode":
        return cls("smoothed", eta=eta, m=m, alpha=alpha)

    @classmethod
    def sharp(cls, eta: float, alpha: float | None = None) -> "SlabMode":
        return cls("sharp", eta=eta, alpha=alpha)

    @classmethod
    def isomorphic(cls, lam: float, delta: float) -> "SlabMode":
        return cls("isomorphic", lam=lam, delta=delta)

    @classmethod
    def general(cls, beta: float, eta: float, alpha: float | None = None) -> "SlabMode":
        return cls("general", eta=eta, alpha=alpha, beta=beta)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def threshold_and_count(self, n: int) -> tuple[float, int]:
        alpha = self.alpha if self.alpha is not None else gaussian_abs_median()
        if self.kind == "smoothed":
            return alpha + self.eta, ceil_count((0.5 - self.eta) * n)
        if self.kind == "sharp":
            return alpha, ceil_count((0.5 - self.eta) * n)
        if self.kind == "isomorphic":
            return self.lam / 2.0, ceil_count((1.0 - self.delta / 4.0) * n)
        return alpha + self.eta, ceil_count((self.beta - self.eta) * n)


@dataclass(frozen=True, eq=False)
class SlabBody:
    directions: np.ndarray  # (n, d)
    theta: float
    k: int
    mode: SlabMode | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        z = np.array(self.directions, dtype=float)
        if z.ndim != 2 or z.shape[0] == 0:
            raise BodyError(f"slab directions must be a non-empty (n, d) array, got shape {z.shape}")
        if not self.theta > 0:
            raise BodyError(f"theta must be positive, got {self.theta}")
        if not 1 <= self.k <= z.shape[0]:
            raise BodyError(f"required count k={self.k} outside [1, {z.shape[0]}]")
        z.setflags(write=False)
        object.__setattr__(self, "directions", z)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def n(self) -> int:
        return self.directions.shape[0]

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    def slab_counts(self, points) -> np.ndarray:
        pts = _as_points(points, self.d)
        counts = np.empty(pts.shape[0], dtype=np.int64)
        for lo in range(0, pts.shape[0], _DIRECTION_CHUNK):
            proj = np.abs(self.directions @ pts[lo : lo + _DIRECTION_CHUNK].T)
            counts[lo : lo + _DIRECTION_CHUNK] = np.count_nonzero(proj <= self.theta, axis=0)
        return counts

    def contains(self, v) -> bool:
        return bool(self.slab_counts(_as_vector(v, self.d)[None, :])[0] >= self.k)

    def contains_many(self, points) -> np.ndarray:
        return self.slab_counts(points) >= self.k

    def order_statistic(self, directions) -> np.ndarray:
        """a_(k)(u) for each row u: the k-th smallest of |<z_j, u>|."""
        us = _as_points(directions, self.d)
        out = np.empty(us.shape[0])
        for lo in range(0, us.shape[0], _DIRECTION_CHUNK):
            proj = np.abs(self.directions @ us[lo : lo + _DIRECTION_CHUNK].T)
            out[lo : lo + _DIRECTION_CHUNK] = np.partition(proj, self.k - 1, axis=0)[self.k - 1]
        return out

    def radial(self, u) -> float:
        u = _as_vector(u, self.d)
        return float(self.radial_many(u[None, :])[0])

    def radial_many(self, directions) -> np.ndarray:
        us = _as_points(directions, self.d)
        if np.any(~np.any(us != 0, axis=1)):
            raise BodyError("radial function is undefined at the zero direction")
        a = self.order_statistic(us)
        with np.errstate(divide="ignore"):
            return np.where(a > 0, self.theta / a, np.inf)


def build_slab_body(samples, mode: SlabMode) -> SlabBody:
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise BodyError(f"expected a non-empty (N, d) sample array, got shape {x.shape}")
    meta: dict = {"samples": int(x.shape[0])}
    if mode.kind == "smoothed":
        if x.shape[0] < mode.m:
            raise BodyError(f"{x.shape[0]} samples cannot fill a single block of size {mode.m}")
        blocks = block_average(x, mode.m)
        x = blocks.vectors
        meta["dropped"] = blocks.dropped
    theta, k = mode.threshold_and_count(x.shape[0])
    return SlabBody(x, theta, k, mode, meta)


@dataclass(frozen=True, eq=False)
class ThresholdNetwork:
    """Two-layer threshold network equivalent to a slab body.

    Unit i fires when ``<v, w_i> >= b_i`` (``> b_i`` if ``strict[i]``). The
    output is ``sum_i sign_i * fire_i >= threshold``. Each slab contributes
    the pair ``1{<v,z> >= -theta} - 1{<v,z> > theta}``, which is exactly the
    closed-slab indicator, boundary included.
    """

    weights: np.ndarray  # (2n, d)
    biases: np.ndarray   # (2n,)
    signs: np.ndarray    # (2n,) of +-1
    strict: np.ndarray   # (2n,) bool
    threshold: int

    @property
    def units(self) -> int:
        return self.weights.shape[0]

    def unit_sum(self, points) -> np.ndarray:
        pts = _as_points(points, self.weights.shape[1])
        pre = pts @ self.weights.T
        fire = np.where(self.strict, pre > self.biases, pre >= self.biases)
        return fire.astype(np.int64) @ self.signs.astype(np.int64)

    def evaluate(self, points) -> np.ndarray:
        return self.unit_sum(points) >= self.threshold

    def to_dict(self) -> dict:
        return {
            "format": "threshold-network/1",
            "dimension": int(self.weights.shape[1]),
            "threshold": int(self.threshold),
            "units": [
                {"weight": w.tolist(), "bias": float(b), "sign": int(s), "strict": bool(t)}
                for w, b, s, t in zip(self.weights, self.biases, self.signs, self.strict)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdNetwork":
        units = data["units"]
        return cls(
            np.array([u["weight"] for u in units], dtype=float).reshape(len(units), int(data["dimension"])),
            np.array([u["bias"] for u in units], dtype=float),
            np.array([u["sign"] for u in units], dtype=np.int64),
            np.array([u.get("strict", False) for u in units], dtype=bool),
            int(data["threshold"]),
        )


def export_threshold_network(body: SlabBody) -> ThresholdNetwork:
    n = body.n
    z = body.directions
    # interleaved: unit 2j is the lower face of slab j, unit 2j+1 the upper face
    weights = np.repeat(z, 2, axis=0)
    biases = np.tile([-body.theta, body.theta], n)
    signs = np.tile([1, -1], n)
    strict = np.tile([False, True], n)
    return ThresholdNetwork(weights, biases, signs, strict, body.k)


def _as_vector(v, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (d,):
        raise BodyError(f"dimension mismatch: expected a vector of length {d}, got shape {v.shape}")
    return v


def _as_points(points, d: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != d:
        raise BodyError(f"dimension mismatch: expected points in R^{d}, got shape {pts.shape}")
    return pts
