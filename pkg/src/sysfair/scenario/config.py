"""Scenario configuration schema, strict loading and validation.

A config file is YAML (JSON is accepted too, being a YAML subset)::

    name: my-scenario            # default "custom"
    description: ""              # free text
    n: 1000                      # individuals
    f: 0.5                       # protected fraction
    quality_dist: {base_mean: 0.97, std_dev: 0.10, protected_shift: 0.25}
    firms:                       # required, at least one
      - threshold: 0.7           # scalar, or {non_protected: .., protected: ..}
        sophistication: 0.7      # same
        cost: 0.0                # optional, default 0
        id: 0                    # optional, default list position
    t: 50                        # periods
    applicants_per_period: 100
    reward: 0.05
    penalty: -0.05
    targeting: {kind: all}       # or {non_protected: {...}, protected: {kind: random, k: 3}}
    replications: 100
    base_seed: 20240601
    metrics_mode: per_period     # or cumulative

Unknown keys at any level are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from ..ecosystem import TargetingPolicy
from ..firm import FirmConfig
from ..population import ConfigError, GroupId, QualityDistConfig, protected_count

DEFAULT_SEED = 20240601
METRICS_MODES = ("per_period", "cumulative")


@dataclass(frozen=True)
class ScenarioConfig:
    firms: tuple[FirmConfig, ...]
    name: str = "custom"
    description: str = ""
    n: int = 1000
    f: float = 0.5
    quality_dist: QualityDistConfig = field(default_factory=QualityDistConfig)
    t: int = 50
    applicants_per_period: int = 100
    reward: float = 0.05
    penalty: float = -0.05
    targeting: tuple[TargetingPolicy, TargetingPolicy] = (TargetingPolicy(), TargetingPolicy())
    replications: int = 100
    base_seed: int = DEFAULT_SEED
    metrics_mode: str = "per_period"

    @property
    def m(self) -> int:
        return len(self.firms)

    @property
    def cumulative(self) -> bool:
        return self.metrics_mode == "cumulative"

    @property
    def scope_labels(self) -> list[str]:
        return [f"firm:{fc.id}" for fc in self.firms] + ["ecosystem"]

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def errors(self) -> list[str]:
        errs = []
        if self.n < 1:
            errs.append(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.f <= 1.0:
            errs.append(f"f must be in [0, 1], got {self.f}")
        errs += self.quality_dist.validate()
        if not self.firms:
            errs.append("firms must list at least one firm")
        ids = [fc.id for fc in self.firms]
        if len(set(ids)) != len(ids):
            errs.append(f"firms: ids must be unique, got {ids}")
        for i, fc in enumerate(self.firms):
            errs += fc.validate(f"firms[{i}]")
        if self.t < 1:
            errs.append(f"t must be >= 1, got {self.t}")
        if not 1 <= self.applicants_per_period <= self.n:
            errs.append(f"applicants_per_period must be in [1, n={self.n}], got {self.applicants_per_period}")
        if self.reward < 0:
            errs.append(f"reward must be >= 0, got {self.reward}")
        if self.penalty > 0:
            errs.append(f"penalty must be <= 0, got {self.penalty}")
        for g, pol in zip(GroupId, self.targeting):
            errs += pol.validate(self.m, f"targeting.{g.label}")
        if self.replications < 1:
            errs.append(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.base_seed < 2**64:
            errs.append(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed}")
        if self.metrics_mode not in METRICS_MODES:
            errs.append(f"metrics_mode must be one of {METRICS_MODES}, got {self.metrics_mode!r}")
        return errs

    def validate(self) -> "ScenarioConfig":
        errs = self.errors()
        if errs:
            raise ConfigError(errs)
        if self.f > 0 and protected_count(self.n, self.f) == 0:
            warnings.warn(f"f={self.f} with n={self.n} rounds to zero protected individuals", stacklevel=2)
        return self

    def to_dict(self) -> dict[str, Any]:
        def per_group(pair):
            a, b = pair
            return a if a == b else {"non_protected": a, "protected": b}

        np_pol, p_pol = self.targeting
        return {
            "name": self.name,
            "description": self.description,
            "n": self.n,
            "f": self.f,
            "quality_dist": dataclasses.asdict(self.quality_dist),
            "firms": [
                {"id": fc.id, "threshold": per_group(fc.threshold), "sophistication": per_group(fc.sophistication), "cost": fc.cost}
                for fc in self.firms
            ],
            "t": self.t,
            "applicants_per_period": self.applicants_per_period,
            "reward": self.reward,
            "penalty": self.penalty,
            "targeting": np_pol.to_dict() if np_pol == p_pol else {"non_protected": np_pol.to_dict(), "protected": p_pol.to_dict()},
            "replications": self.replications,
            "base_seed": self.base_seed,
            "metrics_mode": self.metrics_mode,
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


# -- parsing -----------------------------------------------------------------

_TOP_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)}
_DIST_KEYS = {f.name for f in dataclasses.fields(QualityDistConfig)}
_FIRM_KEYS = {"id", "threshold", "sophistication", "cost"}
_GROUP_KEYS = {g.label for g in GroupId}
_POLICY_KEYS = {"kind", "k"}


class _Parser:
    def __init__(self):
        self.errors: list[str] = []

    def unknown(self, mapping: dict, allowed: set[str], where: str) -> None:
        for key in mapping:
            if key not in allowed:
                self.errors.append(f"{where}: unknown key {key!r}")

    def number(self, value, where: str, kind=float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.errors.append(f"{where} must be a number, got {value!r}")
            return None
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                self.errors.append(f"{where} must be an integer, got {value!r}")
                return None
            return int(value)
        return float(value)

    def mapping(self, value, where: str) -> dict | None:
        if not isinstance(value, dict):
            self.errors.append(f"{where} must be a mapping, got {value!r}")
            return None
        return value

    def per_group(self, value, where: str) -> tuple[float, float] | None:
        if isinstance(value, dict):
            self.unknown(value, _GROUP_KEYS, where)
            missing = _GROUP_KEYS - value.keys()
            if missing:
                self.errors.append(f"{where}: missing {sorted(missing)}")
                return None
            pair = tuple(self.number(value[g.label], f"{where}.{g.label}") for g in GroupId)
            return None if None in pair else pair
        x = self.number(value, where)
        return None if x is None else (x, x)

    def policy(self, value, where: str) -> TargetingPolicy | None:
        value = self.mapping(value, where)
        if value is None:
            return None
        self.unknown(value, _POLICY_KEYS, where)
        kind = value.get("kind", "all")
        k = value.get("k")
        if k is not None:
            k = self.number(k, f"{where}.k", int)
        return TargetingPolicy(kind, k)

    def firm(self, value, i: int) -> FirmConfig | None:
        where = f"firms[{i}]"
        value = self.mapping(value, where)
        if value is None:
            return None
        self.unknown(value, _FIRM_KEYS, where)
        for req in ("threshold", "sophistication"):
            if req not in value:
                self.errors.append(f"{where}.{req} is required")
        if not {"threshold", "sophistication"} <= value.keys():
            return None
        fid = self.number(value.get("id", i), f"{where}.id", int)
        tau = self.per_group(value["threshold"], f"{where}.threshold")
        soph = self.per_group(value["sophistication"], f"{where}.sophistication")
        cost = self.number(value.get("cost", 0.0), f"{where}.cost")
        if None in (fid, tau, soph, cost):
            return None
        return FirmConfig(fid, tau, soph, cost)


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build and validate a config; every problem is reported at once."""
    p = _Parser()
    raw = p.mapping(raw, "config")
    if raw is None:
        raise ConfigError(p.errors)
    p.unknown(raw, _TOP_KEYS, "config")
    kw: dict[str, Any] = {}

    if "firms" not in raw:
        p.errors.append("firms is required")
    elif not isinstance(raw["firms"], list):
        p.errors.append("firms must be a list")
    else:
        firms = [p.firm(v, i) for i, v in enumerate(raw["firms"])]
        kw["firms"] = tuple(fc for fc in firms if fc is not None)

    for key in ("name", "description", "metrics_mode"):
        if key in raw:
            kw[key] = str(raw[key])
    for key in ("n", "t", "applicants_per_period", "replications", "base_seed"):
        if key in raw:
            kw[key] = p.number(raw[key], key, int)
    for key in ("f", "reward", "penalty"):
        if key in raw:
            kw[key] = p.number(raw[key], key)
    if "quality_dist" in raw:
        d = p.mapping(raw["quality_dist"], "quality_dist")
        if d is not None:
            p.unknown(d, _DIST_KEYS, "quality_dist")
            vals = {k: p.number(v, f"quality_dist.{k}") for k, v in d.items() if k in _DIST_KEYS}
            kw["quality_dist"] = dataclasses.replace(QualityDistConfig(), **vals)
    if "targeting" in raw:
        t = p.mapping(raw["targeting"], "targeting")
        if t is not None:
            if t.keys() & _GROUP_KEYS:
                p.unknown(t, _GROUP_KEYS, "targeting")
                kw["targeting"] = tuple(
                    p.policy(t.get(g.label, {"kind": "all"}), f"targeting.{g.label}") for g in GroupId
                )
            else:
                pol = p.policy(t, "targeting")
                kw["targeting"] = (pol, pol)

    if p.errors or any(v is None for v in kw.values()) or None in kw.get("targeting", ()):
        raise ConfigError(p.errors or ["invalid config"])
    return ScenarioConfig(**kw).validate()


def load_config(source: str | Path) -> ScenarioConfig:
    """Parse YAML/JSON text, or a path to such a file."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        source = Path(source).read_text()
    try:
        raw = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return config_from_dict(raw)


def dump_json(config: ScenarioConfig) -> str:
    return json.dumps(config.to_dict(), indent=2) + "\n"
