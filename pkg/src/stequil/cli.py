"""Command-line front end.

Subcommands: run (one protocol end to end), sweep (duration scan), trajectory
(spin-space time series), presets (list the named transformations). Exit
codes: 0 success, 2 invalid configuration, 3 synthesis infeasible, 4
integration failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, NonPositiveAnsatzError, NoRootError, PositivityLossError, StepTooLargeError
from . import report as rep

EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_INTEGRATION = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=list(rep.PRESET_NAMES), help="named transformation")
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--tf", type=float, help="protocol duration in atomic units")
    p.add_argument("--verify", action="store_true", help="cross-check against the superoperator oracle")
    p.add_argument("--outdir", type=Path, help="output directory (fallback: $STE_OUTDIR, then cwd)")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="time-series file format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stequil",
        description="Synthesize and account fast-thermalization drives for a two-level system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="synthesize one protocol, integrate it, write report + time series")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="scan protocol duration; one row per t_f")
    _add_common(p_sweep)
    p_sweep.add_argument("--tf-list", type=str, help="comma-separated durations in atomic units")

    p_traj = sub.add_parser("trajectory", help="spin-space trajectory of one run")
    _add_common(p_traj)

    sub.add_parser("presets", help="list the named transformations")
    return parser


def _config_from_args(args) -> rep.RunConfig:
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    if args.preset is not None:
        data["preset"] = args.preset
    if args.tf is not None:
        data["tf"] = args.tf
    if args.verify:
        data["verify"] = True
    if args.outdir is not None:
        data["outdir"] = str(args.outdir)
    if getattr(args, "tf_list", None):
        try:
            data["tf_list"] = [float(x) for x in args.tf_list.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --tf-list: {exc}") from exc
    if "preset" not in data and "rabi_i" not in data:
        raise ConfigError("give --preset, or a --config file with explicit boundary data")
    return rep.load_config(data)


def _outdir(config: rep.RunConfig) -> Path:
    out = config.outdir or Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stem(config: rep.RunConfig) -> str:
    if config.preset_name:
        return config.preset_name
    cfg = config.synthesis
    return f"custom_{cfg.rabi_i:g}to{cfg.rabi_f:g}"


def cmd_run(args) -> int:
    config = _config_from_args(args)
    result = rep.run(config)
    out = _outdir(config)
    stem = _stem(config)
    ts_path = out / f"{stem}_timeseries.{args.format}"
    rep.write_timeseries(result, ts_path, args.format)
    report = result.report_dict()
    report["files"] = {"timeseries": str(ts_path)}
    report_path = out / f"{stem}_report.json"
    report_path.write_text(json.dumps(report, indent=1))
    print(json.dumps(report, indent=1))
    return 0


def cmd_sweep(args) -> int:
    config = _config_from_args(args)
    if not config.tf_list:
        raise ConfigError("sweep requires --tf-list or a tf_list config entry")
    rows = rep.sweep(config)
    out = _outdir(config)
    path = out / f"{_stem(config)}_sweep.{args.format}"
    rep.write_sweep(rows, path, args.format)
    for row in rows:
        print(json.dumps(row))
    print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_trajectory(args) -> int:
    config = _config_from_args(args)
    data = rep.trajectory(config)
    out = _outdir(config)
    path = out / f"{_stem(config)}_trajectory.{args.format}"
    rep.write_trajectory(data, path, args.format)
    print(f"wrote {path}")
    return 0


def cmd_presets(_args) -> int:
    for row in rep.preset_table():
        print(json.dumps(row))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "sweep": cmd_sweep,
        "trajectory": cmd_trajectory,
        "presets": cmd_presets,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoRootError, NonPositiveAnsatzError) as exc:
        print(f"synthesis infeasible: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except (PositivityLossError, StepTooLargeError) as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
