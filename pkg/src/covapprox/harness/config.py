"""Experiment configuration.

Configs are flat JSON objects. Every key must be a field of
:class:`ExperimentConfig`; anything else is rejected. Fields left unset take
the defaults registered for the named experiment.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    distribution: dict | None = None
    d: int | None = None
    N: int | None = None
    n: int | None = None
    m: int | None = None
    eta: float | None = None
    delta: float | None = None            # failure probability of the heavy-tail lemma
    lam: float | None = None              # small-ball level
    smallball_delta: float | None = None  # small-ball probability
    p: float | None = None
    u: float | None = None
    alpha: float | None = None
    beta: float | None = None
    body: str | None = None
    directions: int | None = None
    trials: int | None = None
    seeds: int | None = None
    seed: int = 0
    candidates: list | None = None
    eta_list: list | None = None
    eps_list: list | None = None
    m_list: list | None = None
    k_d_pairs: list | None = None
    n_multipliers: list | None = None
    alpha_draws: int | None = None
    m0_trials: int | None = None
    m0_directions: int | None = None
    output: str | None = None
    format: str = "json"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {unknown}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' field")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def merged(self, defaults: dict) -> "ExperimentConfig":
        """Fill unset fields from ``defaults``."""
        unknown = sorted(set(defaults) - {f.name for f in fields(self)})
        if unknown:
            raise ConfigError(f"bad defaults: {unknown}")
        return replace(self, **{k: v for k, v in defaults.items() if getattr(self, k) is None})
