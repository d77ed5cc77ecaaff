import json
from pathlib import Path

import numpy as np
import pytest

from sysfair.ecosystem import TargetingPolicy
from sysfair.population import ConfigError
from sysfair.scenario import (
    ALIASES,
    CATALOG,
    SWEEPS,
    CatalogError,
    ScenarioConfig,
    builtin,
    config_from_dict,
    derive_seed,
    load_config,
    names,
    run_scenario,
    sweep,
    with_axis,
)
from sysfair.firm import FirmConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
ONE_FIRM = {"firms": [{"threshold": 0.7, "sophistication": 0.7}]}


def small(**kw) -> ScenarioConfig:
    base = dict(firms=(FirmConfig.uniform(0, 0.7, 0.7),), n=200, t=6, applicants_per_period=20, replications=5)
    base.update(kw)
    return ScenarioConfig(**base).validate()


# -- loading and validation ------------------------------------------------------


def test_baseline_file_defaults():
    cfg = load_config(CONFIGS / "table2.yaml")
    assert (cfg.n, cfg.f, cfg.t, cfg.reward, cfg.penalty) == (1000, 0.5, 50, 0.05, -0.05)
    assert cfg.applicants_per_period == 100 and cfg.replications == 100


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    assert load_config(path).name == path.stem


def test_out_of_range_threshold_names_field():
    with pytest.raises(ConfigError) as err:
        load_config("firms: [{threshold: 1.5, sophistication: 0.7}]\n")
    assert any("firms[0].threshold" in e for e in err.value.errors)


def test_every_error_reported_together():
    raw = {"n": 0, "f": 2, "firms": [{"threshold": -1, "sophistication": 0}]}
    with pytest.raises(ConfigError) as err:
        config_from_dict(raw)
    text = " ".join(err.value.errors)
    for field in ("n must", "f must", "threshold", "sophistication"):
        assert field in text


def test_omitted_cost_defaults_to_zero():
    cfg = config_from_dict({"firms": [{"threshold": 0.6, "sophistication": 0.8}] * 2})
    assert [fc.cost for fc in cfg.firms] == [0.0, 0.0]
    assert cfg.targeting == (TargetingPolicy(), TargetingPolicy())
    assert [fc.id for fc in cfg.firms] == [0, 1]


@pytest.mark.parametrize(
    "raw,where",
    [
        ({**ONE_FIRM, "colour": "red"}, "colour"),
        ({"firms": [{"threshold": 0.7, "sophistication": 0.7, "bias": 1}]}, "bias"),
        ({**ONE_FIRM, "quality_dist": {"mean": 0.5}}, "mean"),
        ({**ONE_FIRM, "targeting": {"kind": "random", "k": 2}}, "k"),
        ({"firms": [{"threshold": {"protected": 0.7, "others": 0.5}, "sophistication": 0.7}]}, "others"),
    ],
)
def test_rejected_configs(raw, where):
    with pytest.raises(ConfigError) as err:
        config_from_dict(raw)
    assert where in str(err.value)


def test_missing_firms_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"n": 10})


def test_rounding_to_no_protected_warns():
    with pytest.warns(UserWarning, match="zero protected"):
        config_from_dict({**ONE_FIRM, "n": 10, "f": 0.01, "applicants_per_period": 5})


def test_per_group_values_parse():
    cfg = load_config(CONFIGS / "explicit-bias.yaml")
    assert cfg.firms[0].threshold == (0.8, 0.9)
    assert cfg.firms[1].threshold == (0.8, 0.8)


@pytest.mark.parametrize("name", ["study2-explicit-sc4", "study3-sc4", "appendixA-study1-multi-b-s0.9-t2"])
def test_yaml_round_trip(name):
    cfg = builtin(name)
    assert load_config(cfg.to_yaml()) == cfg
    assert config_from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_bad_yaml_is_config_error():
    with pytest.raises(ConfigError):
        load_config("firms: [\n")


# -- catalog -------------------------------------------------------------------------


def expected_catalog():
    """Parameters written out independently of the catalog module."""
    table = {}
    for prefix, f in (("", 0.5), ("appendixA-", 0.136)):
        for s in (0.7, 0.9):
            for i, tau in enumerate((0.5, 0.6, 0.7, 0.8), start=1):
                focal = ((tau, tau), (s, s))
                table[f"{prefix}study1-single-s{s}-t{i}"] = (f, [focal])
                table[f"{prefix}study1-multi-a-s{s}-t{i}"] = (f, [focal, ((0.7, 0.7), (0.7, 0.7))])
                table[f"{prefix}study1-multi-b-s{s}-t{i}"] = (f, [focal, ((0.6, 0.6), (0.9, 0.9))])
    for tau in (0.3, 0.8):
        for sc, soph in enumerate(((0.9, 0.7), (0.9, 0.9), (0.8, 0.8), (0.7, 0.7)), start=1):
            table[f"study2-implicit-t{tau}-sc{sc}"] = (0.5, [((tau, tau), soph)] * 2)
    fair, biased = (0.8, 0.8), (0.8, 0.9)
    s = (0.8, 0.8)
    table["study2-explicit-sc1"] = (0.5, [(fair, s), (fair, s)])
    table["study2-explicit-sc2"] = (0.5, [(biased, s), (fair, s)])
    table["study2-explicit-sc3"] = (0.5, [(biased, s), (biased, s)])
    table["study2-explicit-sc4"] = (0.5, [(biased, s), ((0.9, 0.8), s)])
    for i, v in enumerate([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], start=1):
        table[f"appendixC-tau-sweep-sc{i}"] = (0.5, [((v, v), (0.7, 0.7))])
        table[f"appendixC-s-sweep-sc{i}"] = (0.5, [((0.7, 0.7), (v, v))])
    return table


EXPECTED = expected_catalog()


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_catalog_fidelity(name):
    f, firms = EXPECTED[name]
    cfg = builtin(name)
    assert cfg.name == name
    assert (cfg.n, cfg.t, cfg.applicants_per_period, cfg.replications) == (1000, 50, 100, 100)
    assert (cfg.reward, cfg.penalty) == (0.05, -0.05)
    assert cfg.f == f
    assert cfg.targeting == (TargetingPolicy(), TargetingPolicy())
    assert [(fc.threshold, fc.sophistication, fc.cost) for fc in cfg.firms] == [(t, s, 0.0) for t, s in firms]
    assert [fc.id for fc in cfg.firms] == list(range(len(firms)))


@pytest.mark.parametrize("sc", [1, 2, 3, 4])
def test_study3_entries(sc):
    cfg = builtin(f"study3-sc{sc}")
    assert (cfg.n, cfg.m, cfg.applicants_per_period, cfg.replications) == (100_000, 20, 10_000, 20)
    taus = [fc.threshold for fc in cfg.firms]
    assert taus == [(0.6, 0.6)] * 10 + [(0.8, 0.8)] * 10
    assert all(fc.sophistication == (0.8, 0.8) for fc in cfg.firms)
    want_cost = 0.1 if sc == 4 else 0.0
    assert [fc.cost for fc in cfg.firms] == [want_cost] * 10 + [0.0] * 10
    protected = {1: TargetingPolicy(), 2: TargetingPolicy("random", 3), 3: TargetingPolicy("low_threshold", 3)}
    assert cfg.targeting == (TargetingPolicy(), protected.get(sc, TargetingPolicy("low_threshold", 3)))


def test_catalog_is_complete():
    covered = set(EXPECTED) | {f"study3-sc{i}" for i in range(1, 5)}
    assert set(CATALOG) == covered
    assert set(names()) == covered | set(ALIASES) | set(SWEEPS)


def test_aliases_and_sweeps():
    assert builtin("study1-multi-a").m == 2
    assert builtin("study1-multi-b").firms[1].sophistication == (0.9, 0.9)
    assert SWEEPS["appendixC-tau-sweep"].values == (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    assert SWEEPS["appendixC-s-sweep"].axis == "sophistication"


def test_unknown_name_lists_valid_names():
    with pytest.raises(CatalogError) as err:
        builtin("nonexistent")
    assert "study1-single-s0.7-t1" in str(err.value)


# -- seeds -----------------------------------------------------------------------------


def test_derive_seed_distinct_and_stable():
    seeds = [derive_seed(7, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds == [derive_seed(7, i) for i in range(1000)]
    assert all(0 <= s < 2**64 for s in seeds)


def test_derive_seed_depends_on_base():
    assert all(derive_seed(7, i) != derive_seed(8, i) for i in range(1000))


# -- running -------------------------------------------------------------------------


def test_run_scenario_series_lengths():
    cfg = small()
    res = run_scenario(cfg, 1)
    assert res.counts.shape == (5, 6, 2, 2, 4)
    assert res.table.mean.shape == (6, len(res.table.keys))
    assert len(res.table.series("ecosystem", "all", "TPR").mean) == 6


def test_parallelism_does_not_change_results():
    cfg = small(firms=(FirmConfig.uniform(0, 0.6, 0.9), FirmConfig.uniform(1, 0.7, 0.7)), replications=9)
    a, b = run_scenario(cfg, 1), run_scenario(cfg, 8)
    assert np.array_equal(a.counts, b.counts)
    assert a.metric_csv() == b.metric_csv()
    assert a.manifest_json() == b.manifest_json()


def test_single_replication_has_zero_std():
    res = run_scenario(small(replications=1), 1)
    mean, std, n = res.table.mean, res.table.std, res.table.n
    present = n == 1
    assert np.all(std[present] == 0.0)
    assert np.all(np.isnan(mean[~present]))


def test_manifest_records_seeds():
    res = run_scenario(small(base_seed=99), 1)
    man = res.manifest()
    assert man["replication_seeds"] == [derive_seed(99, i) for i in range(5)]
    assert man["config"] == small(base_seed=99).to_dict()
    assert res.provenance["base_seed"] == 99 and "timestamp" in res.provenance


def test_sweep_results_in_order():
    out = sweep(small(replications=2), "threshold", [0.3, 0.5, 0.9], 1)
    assert [r.config.firms[0].threshold for r in out] == [(0.3, 0.3), (0.5, 0.5), (0.9, 0.9)]
    assert all(r.config.base_seed == small().base_seed for r in out)


def test_empty_sweep_is_empty():
    assert sweep(small(), "cost", [], 1) == []


def test_single_value_sweep_matches_direct_run():
    base = small(replications=3)
    [res] = sweep(base, "sophistication", [0.9], 1)
    direct = run_scenario(with_axis(base, "sophistication", 0.9), 1)
    assert np.array_equal(res.counts, direct.counts)
    assert res.metric_csv() == direct.metric_csv()


@pytest.mark.parametrize("axis,value", [("threshold", 1.5), ("f", -0.1), ("cost", 1.0), ("colour", 0.5)])
def test_sweep_rejects_bad_values(axis, value):
    with pytest.raises(ConfigError):
        sweep(small(), axis, [0.5, value], 1)


def test_sweep_axis_f_and_cost():
    assert with_axis(small(), "f", 0.25).f == 0.25
    cfg = with_axis(builtin("study3-sc1"), "cost", 0.2)
    assert all(fc.cost == 0.2 for fc in cfg.firms)
    assert cfg.name == "study3-sc1[cost=0.2]"
