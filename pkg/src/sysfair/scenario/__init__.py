"""Scenario configs, the built-in catalog and the replication runner."""

from ..seeding import derive_seed
from .catalog import ALIASES, CATALOG, SWEEPS, CatalogError, builtin, listing, names
from .config import ScenarioConfig, config_from_dict, load_config
from .runner import SWEEP_AXES, ScenarioResult, run_replications, run_scenario, sweep, with_axis

__all__ = [
    "ALIASES", "CATALOG", "SWEEPS", "SWEEP_AXES", "CatalogError", "ScenarioConfig", "ScenarioResult",
    "builtin", "config_from_dict", "derive_seed", "listing", "load_config", "names",
    "run_replications", "run_scenario", "sweep", "with_axis",
]
