"""Command-line entry point.

Subcommands: simulate, experiment <name>, fingerprint <telemetry.csv>,
compare, verify. Exit code is nonzero iff a pass/fail verdict fails or
verification fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fingerprint as fp
from .config import apply_overrides, comparison_config, load_config, RunConfig
from .controller import run_comparison
from .errors import CpodriftError
from .experiments import EXPERIMENT_NAMES, run_experiment
from .simulate import simulate
from .telemetry import read_csv, write_csv
from .verify import verify


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON run config")
    p.add_argument("--seed", type=int, default=None, help="override the seed")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--steps", type=int, default=None, help="override step count")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cpodrift",
        description="co-packaged optics thermal-drift co-simulation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and print the summary")
    _add_common(p)

    p = sub.add_parser("experiment", help="run a standard experiment")
    p.add_argument("name", choices=EXPERIMENT_NAMES)
    _add_common(p)

    p = sub.add_parser("fingerprint",
                       help="build the fingerprint report from a telemetry CSV")
    p.add_argument("telemetry", type=Path)
    _add_common(p)

    p = sub.add_parser("compare", help="reactive vs predictive comparison")
    _add_common(p)

    p = sub.add_parser("verify", help="analytic self-checks")
    _add_common(p)

    return parser


def _config_for(args, fallback: RunConfig | None = None) -> RunConfig:
    cfg = load_config(args.config) if args.config else (fallback or RunConfig())
    return apply_overrides(
        cfg, seed=args.seed, steps=args.steps,
        out_dir=str(args.out) if args.out else None,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except CpodriftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "simulate":
        cfg = _config_for(args)
        run = simulate(cfg)
        print(json.dumps(run.summary.to_dict(), indent=2, default=str))
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            write_csv(run.frame, out / "telemetry.csv")
            run.forecast_log.write_csv(out / "forecast_log.csv")
            print(f"telemetry written to {out}", file=sys.stderr)
        return 0

    if args.command == "experiment":
        cfg = _config_for(args, fallback=None) if (args.config or args.seed
                                                   or args.steps) else None
        result = run_experiment(
            args.name,
            config=cfg,
            out_dir=args.out or "out",
            seed=args.seed if args.seed is not None else 24,
        )
        print(json.dumps(result.summary, indent=2, default=str))
        for f in result.files:
            print(f"wrote {f}", file=sys.stderr)
        return 0 if result.ok else 1

    if args.command == "fingerprint":
        frame = read_csv(args.telemetry)
        cfg = _config_for(args)
        report = fp.build_report(frame, cfg)
        out = args.out or Path("out")
        files = fp.write_report(report, out)
        print(fp.table_text(report))
        for f in files:
            print(f"wrote {f}", file=sys.stderr)
        return 0 if report.ok else 1

    if args.command == "compare":
        cfg = _config_for(args, fallback=comparison_config())
        report = run_comparison(cfg)
        print(report.to_text())
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "comparison.json").write_text(
                json.dumps(report.to_dict(), indent=2)
            )
        return 0

    if args.command == "verify":
        cfg = _config_for(args)
        report = verify(cfg)
        print(report.to_text())
        return 0 if report.ok else 1

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
