"""Replication batches, scenario results and parameter sweeps."""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import __version__
from ..ecosystem import ReplicationResult, run_replication
from ..metrics import MetricTable, metric_csv
from ..population import ConfigError
from ..seeding import derive_seed
from .config import ScenarioConfig

SWEEP_AXES = ("threshold", "sophistication", "f", "cost")


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    counts: np.ndarray  # (R, t, m + 1, 2, 4)
    table: MetricTable
    provenance: dict = field(default_factory=dict)
    replications: list[ReplicationResult] | None = None

    def metric_csv(self, header: bool = True) -> str:
        return metric_csv(self.config.name, self.table, header)

    def manifest(self) -> dict:
        """Deterministic run description (no wall-clock fields)."""
        return {
            "engine": "sysfair",
            "engine_version": __version__,
            "base_seed": self.config.base_seed,
            "replication_seeds": [derive_seed(self.config.base_seed, i) for i in range(self.config.replications)],
            "gap_convention": "non_protected - protected",
            "config": self.config.to_dict(),
        }

    def manifest_json(self) -> str:
        return json.dumps(self.manifest(), indent=2) + "\n"


def default_parallelism() -> int:
    return os.cpu_count() or 1


def _run_chunk(config: ScenarioConfig, indices: list[int], keep_logs: bool) -> list[ReplicationResult]:
    return [run_replication(config, i, keep_logs) for i in indices]


def run_replications(config: ScenarioConfig, parallelism: int | None = None, keep_logs: bool = False) -> list[ReplicationResult]:
    """All replications of ``config``, ordered by index whatever the parallelism."""
    config.validate()
    workers = max(1, min(parallelism or default_parallelism(), config.replications))
    indices = list(range(config.replications))
    if workers == 1:
        return _run_chunk(config, indices, keep_logs)
    chunks = [indices[w::workers] for w in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [config] * workers, chunks, [keep_logs] * workers))
    results = [r for part in parts for r in part]
    return sorted(results, key=lambda r: r.index)


def run_scenario(config: ScenarioConfig, parallelism: int | None = None, keep_logs: bool = False) -> ScenarioResult:
    reps = run_replications(config, parallelism, keep_logs)
    counts = np.stack([r.counts for r in reps])
    table = MetricTable.from_counts(counts, config.scope_labels, config.cumulative)
    provenance = {
        "engine_version": __version__,
        "base_seed": config.base_seed,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    return ScenarioResult(config, counts, table, provenance, reps if keep_logs else None)


def with_axis(base: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """``base`` with one parameter overridden for every firm and group."""
    if axis == "threshold":
        firms = tuple(dataclasses.replace(fc, threshold=(value, value)) for fc in base.firms)
        cfg = base.replace(firms=firms)
    elif axis == "sophistication":
        firms = tuple(dataclasses.replace(fc, sophistication=(value, value)) for fc in base.firms)
        cfg = base.replace(firms=firms)
    elif axis == "cost":
        firms = tuple(dataclasses.replace(fc, cost=value) for fc in base.firms)
        cfg = base.replace(firms=firms)
    elif axis == "f":
        cfg = base.replace(f=value)
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    return cfg.replace(name=f"{base.name}[{axis}={value:g}]")


def sweep(base: ScenarioConfig, axis: str, values, parallelism: int | None = None) -> list[ScenarioResult]:
    """One result per value, in the given order, all sharing ``base.base_seed``."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    configs = [with_axis(base, axis, float(v)) for v in values]
    errors = [e for cfg in configs for e in cfg.errors()]
    if errors:
        raise ConfigError(errors)
    return [run_scenario(cfg, parallelism) for cfg in configs]

