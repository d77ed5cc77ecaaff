import csv
import json

import pytest

from sysfair.cli import main
from sysfair.metrics import CSV_COLUMNS
from sysfair.scenario import load_config

FAST = ["--replications", "2", "--parallelism", "1"]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def small_config(tmp_path, **extra):
    text = "name: tiny\nn: 100\nt: 4\napplicants_per_period: 10\nreplications: 3\n"
    text += "firms:\n  - {threshold: 0.6, sophistication: 0.8}\n  - {threshold: 0.7, sophistication: 0.7}\n"
    text += "".join(f"{k}: {v}\n" for k, v in extra.items())
    path = tmp_path / "tiny.yaml"
    path.write_text(text)
    return path


def test_list_includes_catalog(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("study1-single-s0.7-t1", "study1-multi-a", "study3-sc4", "appendixC-tau-sweep"):
        assert name in out


def test_run_is_byte_identical(tmp_path):
    cfg = small_config(tmp_path)
    for out in ("a", "b"):
        assert main(["run", str(cfg), "--seed", "42", "--output", str(tmp_path / out)] + FAST) == 0
    for suffix in ("metrics.csv", "manifest.json"):
        a = (tmp_path / "a" / f"tiny.{suffix}").read_bytes()
        assert a == (tmp_path / "b" / f"tiny.{suffix}").read_bytes()
    rows = read_rows(tmp_path / "a" / "tiny.metrics.csv")
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert json.loads((tmp_path / "a" / "tiny.manifest.json").read_text())["base_seed"] == 42


def test_seed_flag_changes_output(tmp_path):
    cfg = small_config(tmp_path)
    main(["run", str(cfg), "--seed", "1", "--output", str(tmp_path / "a")] + FAST)
    main(["run", str(cfg), "--seed", "2", "--output", str(tmp_path / "b")] + FAST)
    assert (tmp_path / "a" / "tiny.metrics.csv").read_bytes() != (tmp_path / "b" / "tiny.metrics.csv").read_bytes()


def test_run_catalog_scopes(tmp_path):
    assert main(["run", "study1-multi-a", "--output", str(tmp_path)] + FAST) == 0
    [csv_path] = tmp_path.glob("*.metrics.csv")
    rows = read_rows(csv_path)
    assert {r["scope"] for r in rows} == {"firm:0", "firm:1", "ecosystem"}
    assert {r["period"] for r in rows} == {str(p) for p in range(50)}
    assert {r["n_replications"] for r in rows} <= {"0", "1", "2"}


def test_bad_config_exits_1_and_writes_nothing(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("firms: [{threshold: 1.5, sophistication: 0.7}]\n")
    out = tmp_path / "out"
    assert main(["run", str(bad), "--output", str(out)]) == 1
    assert "firms[0].threshold" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_scenario_exits_1(tmp_path):
    assert main(["run", "nonexistent", "--output", str(tmp_path / "x")]) == 1


def test_missing_file_is_io_error(tmp_path):
    assert main(["run", str(tmp_path / "missing.yaml"), "--output", str(tmp_path / "x")]) == 2


def test_emit_events(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["run", str(cfg), "--emit-events", "--output", str(tmp_path / "o")] + FAST) == 0
    rows = read_rows(tmp_path / "o" / "tiny.events.csv")
    # 2 replications x 4 periods x 10 applicants x 2 firms
    assert len(rows) == 160


def test_cumulative_flag(tmp_path):
    cfg = small_config(tmp_path)
    main(["run", str(cfg), "--cumulative", "--output", str(tmp_path / "o")] + FAST)
    man = json.loads((tmp_path / "o" / "tiny.manifest.json").read_text())
    assert man["config"]["metrics_mode"] == "cumulative"


def test_sweep_writes_one_file_per_value_plus_combined(tmp_path):
    cfg = small_config(tmp_path)
    values = ",".join(str(v / 10) for v in range(1, 10))
    assert main(["sweep", str(cfg), "--axis", "threshold", "--values", values, "--output", str(tmp_path / "s")] + FAST) == 0
    files = sorted(p.name for p in (tmp_path / "s").iterdir())
    assert len(files) == 10
    assert "tiny-threshold-sweep.csv" in files and "tiny-threshold-0.1.metrics.csv" in files
    combined = read_rows(tmp_path / "s" / "tiny-threshold-sweep.csv")
    parts = [read_rows(tmp_path / "s" / f) for f in files if f.endswith(".metrics.csv")]
    assert len(combined) == sum(len(p) for p in parts)
    assert len({r["scenario"] for r in combined}) == 9


def test_catalog_sweep_uses_its_values(tmp_path):
    assert main(["sweep", "appendixC-s-sweep", "--output", str(tmp_path)] + FAST) == 0
    assert len(list(tmp_path.glob("*.metrics.csv"))) == 9


@pytest.mark.parametrize("values", ["", ","])
def test_sweep_with_empty_values_fails(tmp_path, values):
    cfg = small_config(tmp_path)
    out = tmp_path / "s"
    assert main(["sweep", str(cfg), "--axis", "f", "--values", values, "--output", str(out)]) == 1
    assert not out.exists()


def test_sweep_out_of_range_value_fails(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["sweep", str(cfg), "--axis", "threshold", "--values", "0.5,1.5", "--output", str(tmp_path / "s")]) == 1


@pytest.mark.parametrize("fmt", ["yaml", "json"])
def test_export_round_trips(tmp_path, fmt):
    path = tmp_path / f"sc.{fmt}"
    assert main(["export", "study2-explicit-sc4", "--format", fmt, "--output", str(path)]) == 0
    cfg = load_config(path)
    assert cfg.name == "study2-explicit-sc4"
    assert cfg.firms[1].threshold == (0.9, 0.8)


def test_export_to_stdout(capsys):
    assert main(["export", "study3-sc2"]) == 0
    assert load_config(capsys.readouterr().out).n == 100_000


def test_inputs_left_untouched(tmp_path):
    cfg = small_config(tmp_path)
    before = cfg.read_bytes()
    main(["run", str(cfg), "--output", str(tmp_path / "o")] + FAST)
    assert cfg.read_bytes() == before
