"""Command-line front end.

    sysfair list
    sysfair run NAME_OR_CONFIG [--seed N] [--replications R] [--parallelism P]
                               [--output DIR] [--cumulative] [--emit-events]
    sysfair sweep BASE [--axis AXIS --values V1,V2,...] [same flags as run]
    sysfair export NAME [--format yaml|json] [--output FILE]

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .ecosystem import write_event_log
from .metrics import CSV_COLUMNS
from .population import ConfigError
from .scenario import SWEEP_AXES, SWEEPS, CatalogError, builtin, listing, load_config, run_scenario, sweep
from .scenario.config import dump_json
from .scenario.runner import default_parallelism

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2
EVENT_ROWS_WARNING = 1_000_000


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sysfair", description="Firm vs. systemic fairness lending simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios")

    def run_flags(p):
        p.add_argument("--seed", type=int, default=None, help="base seed (default: the scenario's)")
        p.add_argument("--replications", type=int, default=None, help="replication count (default: the scenario's)")
        p.add_argument(
            "--parallelism", type=int, default=None,
            help=f"worker processes (default: CPU count, here {default_parallelism()})",
        )
        p.add_argument("--output", default="results", help="output directory (default: results)")
        p.add_argument("--cumulative", action="store_true", help="cumulative instead of per-period metrics")

    run = sub.add_parser("run", help="run a built-in scenario or a config file")
    run.add_argument("scenario", help="catalog name or path to a YAML/JSON config")
    run_flags(run)
    run.add_argument("--emit-events", action="store_true", help="also write the raw per-application event log")

    sw = sub.add_parser("sweep", help="run one scenario per value of a parameter")
    sw.add_argument("scenario", help="catalog name, catalog sweep name, or config path")
    sw.add_argument("--axis", choices=SWEEP_AXES, default=None)
    sw.add_argument("--values", default=None, help="comma-separated values")
    run_flags(sw)

    ex = sub.add_parser("export", help="write a built-in scenario as an editable config file")
    ex.add_argument("scenario")
    ex.add_argument("--format", choices=("yaml", "json"), default="yaml")
    ex.add_argument("--output", default=None, help="file to write (default: stdout)")
    return parser


def resolve_scenario(ref: str):
    path = Path(ref)
    if path.suffix in (".yaml", ".yml", ".json") or path.is_file():
        return load_config(path.read_text())
    return builtin(ref)


def _override(cfg, args):
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if args.replications is not None:
        changes["replications"] = args.replications
    if args.cumulative:
        changes["metrics_mode"] = "cumulative"
    return cfg.replace(**changes).validate() if changes else cfg


class _StagedOutput:
    """Write files under temporary names; publish them all only on success."""

    def __init__(self, directory: str):
        self.dir = Path(directory)
        self.staged: list[tuple[Path, Path]] = []

    def path(self, name: str) -> Path:
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.dir)
        os.close(fd)
        self.staged.append((Path(tmp), self.dir / name))
        return Path(tmp)

    def write(self, name: str, text: str) -> None:
        self.path(name).write_text(text)

    def __enter__(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            for tmp, final in self.staged:
                os.replace(tmp, final)
        else:
            for tmp, _ in self.staged:
                tmp.unlink(missing_ok=True)
        return False


def cmd_list(args) -> int:
    print("\n".join(listing()))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _override(resolve_scenario(args.scenario), args)
    if args.emit_events:
        rows = cfg.replications * cfg.t * cfg.applicants_per_period * cfg.m
        if rows > EVENT_ROWS_WARNING:
            print(f"warning: event log will have about {rows:,} rows", file=sys.stderr)
    result = run_scenario(cfg, args.parallelism, keep_logs=args.emit_events)
    with _StagedOutput(args.output) as out:
        out.write(f"{cfg.name}.metrics.csv", result.metric_csv())
        out.write(f"{cfg.name}.manifest.json", result.manifest_json())
        if args.emit_events:
            write_event_log(out.path(f"{cfg.name}.events.csv"), result.replications)
    print(f"{cfg.name}: {cfg.replications} replications x {cfg.t} periods -> {args.output}", file=sys.stderr)
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values must be comma-separated numbers: {exc}") from exc


def cmd_sweep(args) -> int:
    if args.scenario in SWEEPS and args.axis is None and args.values is None:
        entry = SWEEPS[args.scenario]
        base, axis, values = entry.base, entry.axis, list(entry.values)
    else:
        if args.axis is None or args.values is None:
            raise ConfigError("--axis and --values are required unless a catalog sweep is named")
        base, axis, values = resolve_scenario(args.scenario), args.axis, _parse_values(args.values)
    if not values:
        raise ConfigError("--values must list at least one value")
    base = _override(base, args)
    results = sweep(base, axis, values, args.parallelism)
    combined = [",".join(CSV_COLUMNS) + "\n"]
    with _StagedOutput(args.output) as out:
        for value, res in zip(values, results):
            out.write(f"{base.name}-{axis}-{value:g}.metrics.csv", res.metric_csv())
            combined.append(res.metric_csv(header=False))
        out.write(f"{base.name}-{axis}-sweep.csv", "".join(combined))
    print(f"{base.name}: {len(results)} sweep points over {axis} -> {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = builtin(args.scenario)
    text = cfg.to_yaml() if args.format == "yaml" else dump_json(cfg)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"list": cmd_list, "run": cmd_run, "sweep": cmd_sweep, "export": cmd_export}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
