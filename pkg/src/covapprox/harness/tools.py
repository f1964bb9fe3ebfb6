"""Single-shot pipelines behind the ``build``, ``certify``, ``estimate-m0``
and ``baseline`` subcommands.

Body kinds accepted in the config ``body`` field:

``slab``             smoothed slab body, block size ``m`` (default 1) and ``eta``
``slab_sharp``       theta = alpha, k = ceil((1/2 - eta) n)
``slab_isomorphic``  theta = lam / 2, k = ceil((1 - smallball_delta / 4) N)
``ellipsoid``        ellipsoid-block body with ``n`` blocks of size ``m``
"""
from __future__ import annotations

import time

import numpy as np

from .. import __version__
from ..baseline import DIAGNOSTIC_COLUMNS, tikhomirov_bound_terms
from ..distributions import DistributionSpec, SpecError, sample_batch
from ..ellipsoid import EllipsoidBody, build_ellipsoid_body, estimate_m0
from ..rng import RngStream
from ..slab import BodyError, SlabBody, SlabMode, build_slab_body, export_threshold_network
from ..verifier import certify_approximation
from .config import ConfigError, ExperimentConfig
from .experiments import DEFAULT_M0_CANDIDATES
from .report import ReportFile

BODY_KINDS = ("slab", "slab_sharp", "slab_isomorphic", "ellipsoid")
BODY_FORMAT = "covapprox-body/1"


def _spec(cfg: ExperimentConfig) -> DistributionSpec:
    data = dict(cfg.distribution or {"kind": "gaussian"})
    if "d" not in data and cfg.d is not None:
        data["d"] = cfg.d
    if data.get("kind") == "gaussian" and "cov" not in data and "d" not in data:
        raise ConfigError("distribution: gaussian needs d or cov")
    try:
        return DistributionSpec.from_dict(data)
    except SpecError as exc:
        raise ConfigError(f"distribution: {exc}") from None


def _slab_mode(cfg: ExperimentConfig) -> SlabMode:
    kind = cfg.body or "slab"
    if kind in ("slab", "slab_sharp") and cfg.eta is not None and not 0 <= cfg.eta < 0.5:
        raise ConfigError(f"eta={cfg.eta}: slab bodies need 0 <= eta < 1/2")
    if kind == "slab":
        return SlabMode.smoothed(cfg.m or 1, cfg.eta or 0.0, alpha=cfg.alpha)
    if kind == "slab_sharp":
        return SlabMode.sharp(cfg.eta or 0.0, alpha=cfg.alpha)
    if cfg.lam is None or cfg.smallball_delta is None:
        raise ConfigError("slab_isomorphic needs lam and smallball_delta")
    return SlabMode.isomorphic(cfg.lam, cfg.smallball_delta)


def _sample_count(cfg: ExperimentConfig, m: int) -> int:
    if cfg.N is not None:
        return int(cfg.N)
    if cfg.n is not None:
        return int(cfg.n) * m
    raise ConfigError("set N (total samples) or n (number of blocks)")


def build_body(cfg: ExperimentConfig):
    """Sample from the configured distribution and build the configured body."""
    kind = cfg.body or "slab"
    if kind not in BODY_KINDS:
        raise ConfigError(f"unknown body {kind!r}; expected one of {BODY_KINDS}")
    spec = _spec(cfg)
    stream = RngStream(int(cfg.seed))
    try:
        if kind == "ellipsoid":
            if cfg.eta is None or not 0 < cfg.eta < 0.25:
                raise ConfigError(f"eta={cfg.eta}: ellipsoid bodies need 0 < eta < 1/4")
            m = cfg.m or 1
            x = sample_batch(spec, _sample_count(cfg, m), stream.spawn(0))
            return spec, build_ellipsoid_body(x, m, cfg.eta)
        mode = _slab_mode(cfg)
        x = sample_batch(spec, _sample_count(cfg, mode.m if mode.kind == "smoothed" else 1), stream.spawn(0))
        return spec, build_slab_body(x, mode)
    except (BodyError, SpecError) as exc:
        raise ConfigError(str(exc)) from None


def body_to_dict(body) -> dict:
    if isinstance(body, SlabBody):
        return {
            "format": BODY_FORMAT,
            "type": "slab",
            "theta": body.theta,
            "k": body.k,
            "mode": body.mode.to_dict() if body.mode else None,
            "meta": dict(body.meta),
            "directions": body.directions.tolist(),
            "network": export_threshold_network(body).to_dict(),
        }
    if isinstance(body, EllipsoidBody):
        return {
            "format": BODY_FORMAT,
            "type": "ellipsoid",
            "m": body.m,
            "eta": body.eta,
            "k": body.k,
            "meta": dict(body.meta),
            "grams": body.grams.tolist(),
        }
    raise TypeError(f"cannot serialise {type(body).__name__}")


def body_from_dict(data: dict):
    if data.get("format") != BODY_FORMAT:
        raise ConfigError(f"not a {BODY_FORMAT} file")
    if data["type"] == "slab":
        mode = SlabMode(**data["mode"]) if data.get("mode") else None
        return SlabBody(np.array(data["directions"], dtype=float), float(data["theta"]), int(data["k"]), mode, data.get("meta", {}))
    if data["type"] == "ellipsoid":
        return EllipsoidBody(np.array(data["grams"], dtype=float), int(data["m"]), float(data["eta"]), int(data["k"]), data.get("meta", {}))
    raise ConfigError(f"unknown body type {data['type']!r}")


def _report(cfg, name, columns, rows, agg, started) -> ReportFile:
    echo = {k: v for k, v in cfg.to_dict().items() if k not in ("output", "format")}
    return ReportFile(name, echo, columns, rows, agg, __version__, {"wall_clock_seconds": time.time() - started})


def run_certify(cfg: ExperimentConfig, body=None, spec: DistributionSpec | None = None) -> ReportFile:
    """Certify ``body`` (built from the config when omitted) against the configured distribution."""
    started = time.time()
    if body is None:
        spec, body = build_body(cfg)
    elif spec is None:
        spec = _spec(cfg)
    if spec.d != body.d:
        raise ConfigError(f"body dimension {body.d} disagrees with distribution dimension {spec.d}")
    rep = certify_approximation(body, spec.covariance, cfg.directions or 10_000, RngStream(int(cfg.seed)).spawn(1))
    row = rep.to_dict()
    row.pop("worst_offenders")
    agg = {"implied_eta": rep.implied_eta, "spread": rep.spread, "worst_offenders": rep.to_dict()["worst_offenders"]}
    if cfg.eta is not None:
        agg["passed"] = bool(rep.infinite_radial_count == 0 and rep.implied_eta <= cfg.eta)
    columns = ["direction_count", "min_ratio", "max_ratio", "infinite_radial_count", "implied_eta"]
    return _report(cfg, "certify", columns, [row], agg, started)


def run_estimate_m0(cfg: ExperimentConfig) -> ReportFile:
    started = time.time()
    if cfg.eta is None or not cfg.eta > 0:
        raise ConfigError(f"eta={cfg.eta}: m0 estimation needs eta > 0")
    spec = _spec(cfg)
    try:
        est = estimate_m0(
            spec,
            cfg.eta,
            cfg.candidates or DEFAULT_M0_CANDIDATES,
            cfg.trials or 3000,
            cfg.directions or 64,
            RngStream(int(cfg.seed)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [{"m": int(m), "failure_probability": p} for m, p in est.failure_probabilities.items()]
    agg = {"m0": est.m0, "attained": est.attained, "passed": est.attained}
    return _report(cfg, "estimate-m0", ["m", "failure_probability"], rows, agg, started)


def run_baseline(cfg: ExperimentConfig) -> ReportFile:
    """Deviation diagnostics of the empirical covariance, one row per trial."""
    started = time.time()
    spec = _spec(cfg)
    if cfg.N is None:
        raise ConfigError("baseline needs N")
    p = cfg.p or 4.0
    if not p > 2:
        raise ConfigError(f"p must exceed 2, got {p}")
    root = RngStream(int(cfg.seed))
    rows = []
    for i in range(cfg.trials or 1):
        x = sample_batch(spec, cfg.N, root.spawn(i))
        rows.append(tikhomirov_bound_terms(x, spec.covariance, p).row(i))
    devs = [r["deviation"] for r in rows]
    agg = {"mean_deviation": float(np.mean(devs)), "max_deviation": float(np.max(devs))}
    if cfg.eta is not None:
        agg["passed"] = bool(max(devs) <= cfg.eta)
    return _report(cfg, "baseline", list(DIAGNOSTIC_COLUMNS), rows, agg, started)

