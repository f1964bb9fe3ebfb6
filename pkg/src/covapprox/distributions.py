"""Seeded samplers with known covariance, and block averaging.

Every :class:`DistributionSpec` knows its exact covariance ``T`` so that the
true ellipsoid ``{v : <Tv, v> <= 1}`` is available to the verifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator

import numpy as np

from .linalg import DEFAULT_SETTINGS, NumericSettings, as_symmetric, psd_pow, sym_eig
from .rng import as_generator

MARGINALS = ("standard_gaussian", "rademacher", "centered_exponential", "student_like")
VARIANTS = ("gaussian", "uniform_sphere", "heavy_tail_xu", "mixed_product")


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class MarginalSpec:
    """A centred real distribution used as i.i.d. coordinates.

    Every kind is normalised to unit variance; ``scale`` multiplies the draws,
    so the variance is ``scale**2``.
    """

    kind: str
    p: float | None = None  # degrees of freedom for student_like
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise SpecError(f"marginal scale must be positive, got {self.scale}")
        if self.kind not in MARGINALS:
            raise SpecError(f"unknown marginal {self.kind!r}; expected one of {MARGINALS}")
        if self.kind == "student_like":
            if self.p is None or not self.p > 2:
                raise SpecError(f"student_like needs p > 2, got {self.p}")
        elif self.p is not None:
            raise SpecError(f"marginal {self.kind!r} takes no parameter p")

    def sample(self, gen: np.random.Generator, shape) -> np.ndarray:
        x = self._sample_unit(gen, shape)
        return x if self.scale == 1.0 else x * self.scale

    def _sample_unit(self, gen: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "standard_gaussian":
            return gen.standard_normal(shape)
        if self.kind == "rademacher":
            return gen.integers(0, 2, size=shape, dtype=np.int8).astype(float) * 2.0 - 1.0
        if self.kind == "centered_exponential":
            return gen.standard_exponential(shape) - 1.0
        # Student t with p degrees of freedom has variance p / (p - 2)
        return gen.standard_t(self.p, shape) * math.sqrt((self.p - 2.0) / self.p)

    @property
    def variance(self) -> float:
        return self.scale * self.scale

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.p is not None:
            out["p"] = self.p
        if self.scale != 1.0:
            out["scale"] = self.scale
        return out

    @classmethod
    def from_dict(cls, data) -> "MarginalSpec":
        if isinstance(data, str):
            return cls(data)
        extra = set(data) - {"kind", "p", "scale"}
        if extra:
            raise SpecError(f"unknown marginal fields: {sorted(extra)}")
        return cls(data["kind"], data.get("p"), float(data.get("scale", 1.0)))


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    kind: str
    d: int
    cov: np.ndarray | None = None          # gaussian
    u: float | None = None                 # heavy_tail_xu
    marginal: MarginalSpec | None = None   # mixed_product
    mixing: np.ndarray | None = None       # mixed_product
    q: float | None = None                 # norm-equivalence exponent, when known
    L: float | None = None                 # norm-equivalence constant, when known
    settings: NumericSettings = field(default=DEFAULT_SETTINGS, repr=False)

    def __post_init__(self):
        if self.kind not in VARIANTS:
            raise SpecError(f"unknown distribution {self.kind!r}; expected one of {VARIANTS}")
        if int(self.d) != self.d or self.d < 1:
            raise SpecError(f"dimension must be a positive integer, got {self.d}")
        if self.kind == "gaussian":
            cov = self._checked_matrix(self.cov, "cov")
            w = sym_eig(cov, self.settings).eigenvalues
            if w[-1] <= self.settings.invertible_tol:
                raise SpecError(f"gaussian covariance must be PSD and invertible (smallest eigenvalue {w[-1]:.3e})")
            object.__setattr__(self, "cov", cov)
        elif self.kind == "heavy_tail_xu":
            if self.u is None or not self.u >= 1.0 / self.d:
                raise SpecError(f"heavy_tail_xu requires u >= 1/d = {1.0 / self.d:.6g}, got {self.u}")
        elif self.kind == "mixed_product":
            if not isinstance(self.marginal, MarginalSpec):
                raise SpecError("mixed_product needs a MarginalSpec")
            mixing = self._checked_matrix(self.mixing if self.mixing is not None else np.eye(self.d), "mixing")
            w = sym_eig(mixing, self.settings).eigenvalues
            if w[-1] <= self.settings.invertible_tol:
                raise SpecError(f"mixing matrix must be PSD and invertible (smallest eigenvalue {w[-1]:.3e})")
            object.__setattr__(self, "mixing", mixing)

    def _checked_matrix(self, a, name) -> np.ndarray:
        if a is None:
            raise SpecError(f"{self.kind} needs {name}")
        try:
            a = as_symmetric(a, self.settings)
        except ValueError as exc:
            raise SpecError(f"{name}: {exc}") from None
        if a.shape != (self.d, self.d):
            raise SpecError(f"{name} has shape {a.shape}, expected ({self.d}, {self.d})")
        return a

    # constructors
    @classmethod
    def gaussian(cls, cov, **kw) -> "DistributionSpec":
        cov = np.asarray(cov, dtype=float)
        return cls("gaussian", cov.shape[0], cov=cov, **kw)

    @classmethod
    def standard_gaussian(cls, d: int) -> "DistributionSpec":
        return cls.gaussian(np.eye(d))

    @classmethod
    def uniform_sphere(cls, d: int) -> "DistributionSpec":
        return cls("uniform_sphere", d)

    @classmethod
    def heavy_tail_xu(cls, d: int, u: float) -> "DistributionSpec":
        return cls("heavy_tail_xu", d, u=float(u), q=4.0)

    @classmethod
    def mixed_product(cls, marginal: MarginalSpec | str, mixing=None, d: int | None = None, **kw) -> "DistributionSpec":
        if isinstance(marginal, str):
            marginal = MarginalSpec(marginal)
        if mixing is None:
            if d is None:
                raise SpecError("mixed_product needs either a mixing matrix or d")
            mixing = np.eye(d)
        mixing = np.asarray(mixing, dtype=float)
        return cls("mixed_product", mixing.shape[0], marginal=marginal, mixing=mixing, **kw)

    # xu constants
    @property
    def spike_radius(self) -> float:
        return math.sqrt(self.u * self.d)

    @property
    def spike_probability(self) -> float:
        return 1.0 / (self.u * self.u * self.d * self.d)

    @cached_property
    def covariance(self) -> np.ndarray:
        if self.kind == "gaussian":
            out = np.array(self.cov)
        elif self.kind == "uniform_sphere":
            out = np.eye(self.d) / self.d
        elif self.kind == "heavy_tail_xu":
            out = np.eye(self.d) * xu_second_moment(self.d, self.u)
        else:
            out = np.array(self.mixing) * self.marginal.variance
        out.setflags(write=False)
        return out

    @cached_property
    def _root(self) -> np.ndarray | None:
        base = self.cov if self.kind == "gaussian" else self.mixing
        if np.array_equal(base, np.eye(self.d)):
            return None
        return psd_pow(base, 0.5, self.settings)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "d": int(self.d)}
        if self.kind == "gaussian":
            out["cov"] = np.asarray(self.cov).tolist()
        elif self.kind == "heavy_tail_xu":
            out["u"] = self.u
        elif self.kind == "mixed_product":
            out["marginal"] = self.marginal.to_dict()
            out["mixing"] = np.asarray(self.mixing).tolist()
        if self.q is not None and self.kind != "heavy_tail_xu":
            out["q"] = self.q
        if self.L is not None:
            out["L"] = self.L
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        data = dict(data)
        kind = data.pop("kind", None)
        allowed = {
            "gaussian": {"d", "cov", "q", "L"},
            "uniform_sphere": {"d", "q", "L"},
            "heavy_tail_xu": {"d", "u", "L"},
            "mixed_product": {"d", "marginal", "mixing", "q", "L"},
        }
        if kind not in allowed:
            raise SpecError(f"unknown distribution {kind!r}; expected one of {VARIANTS}")
        extra = set(data) - allowed[kind]
        if extra:
            raise SpecError(f"unknown fields for {kind}: {sorted(extra)}")
        meta = {k: data[k] for k in ("q", "L") if k in data}
        if "d" not in data and kind in ("uniform_sphere", "heavy_tail_xu"):
            raise SpecError(f"{kind} needs d")
        if kind == "gaussian":
            cov = data.get("cov")
            if cov is None:
                cov = np.eye(int(data["d"]))
            return cls.gaussian(cov, **meta)
        if kind == "uniform_sphere":
            return cls("uniform_sphere", int(data["d"]), **meta)
        if kind == "heavy_tail_xu":
            if "u" not in data:
                raise SpecError("heavy_tail_xu needs u")
            return cls("heavy_tail_xu", int(data["d"]), u=float(data["u"]), q=4.0, **meta)
        if "marginal" not in data:
            raise SpecError("mixed_product needs marginal")
        return cls.mixed_product(MarginalSpec.from_dict(data["marginal"]), data.get("mixing"), d=data.get("d"), **meta)


def xu_second_moment(d: int, u: float) -> float:
    """E z_i^2 = R^2 / (u^2 d^2) + 1 - 1 / (u^2 d^2) with R^2 = u d."""
    p = 1.0 / (u * u * d * d)
    return u * d * p + (1.0 - p)


def xu_fourth_moment(d: int, u: float) -> float:
    """E z_i^4 = R^4 / (u^2 d^2) + 1 - 1 / (u^2 d^2) = 2 - 1 / (u^2 d^2)."""
    p = 1.0 / (u * u * d * d)
    return (u * d) ** 2 * p + (1.0 - p)


def true_covariance(spec: DistributionSpec) -> np.ndarray:
    return spec.covariance


def sample_batch(spec: DistributionSpec, count: int, rng) -> np.ndarray:
    """``count`` i.i.d. draws of ``spec`` as a ``(count, d)`` array."""
    if int(count) != count or count < 1:
        raise SpecError(f"count must be a positive integer, got {count}")
    gen = as_generator(rng)
    d = spec.d
    shape = (int(count), d)
    if spec.kind == "gaussian":
        g = gen.standard_normal(shape)
        root = spec._root
        return g if root is None else g @ root
    if spec.kind == "uniform_sphere":
        g = gen.standard_normal(shape)
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if spec.kind == "heavy_tail_xu":
        spike = gen.random(shape) < spec.spike_probability
        sign = gen.integers(0, 2, size=shape, dtype=np.int8).astype(float) * 2.0 - 1.0
        return sign * np.where(spike, spec.spike_radius, 1.0)
    xi = spec.marginal.sample(gen, shape)
    root = spec._root
    return xi if root is None else xi @ root


def iter_batches(spec: DistributionSpec, count: int, rng, chunk: int = 1 << 18) -> Iterator[np.ndarray]:
    """Stream ``count`` draws in chunks of at most ``chunk`` rows from one generator."""
    gen = as_generator(rng)
    left = int(count)
    while left > 0:
        size = min(chunk, left)
        yield sample_batch(spec, size, gen)
        left -= size


@dataclass(frozen=True)
class BlockAverage:
    vectors: np.ndarray  # (n, d)
    m: int
    dropped: int         # trailing samples that did not fill a block

    @property
    def n(self) -> int:
        return self.vectors.shape[0]


def block_average(samples, m: int) -> BlockAverage:
    """Z_j = m^{-1/2} * sum of the j-th run of m consecutive samples."""
    if int(m) != m or m <= 0:
        raise SpecError(f"block size m must be a positive integer, got {m}")
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise SpecError(f"expected a non-empty (N, d) sample array, got shape {x.shape}")
    n = x.shape[0] // m
    dropped = x.shape[0] - n * m
    if n == 0:
        raise SpecError(f"{x.shape[0]} samples cannot fill one block of size m={m}")
    if m == 1:
        return BlockAverage(x.copy(), 1, 0)
    z = x[: n * m].reshape(n, m, x.shape[1]).sum(axis=1) / math.sqrt(m)
    return BlockAverage(z, int(m), dropped)
