"""Standard experiments: each produces artifact files under an output dir.

* ``validation90k``: the flagship 90,000-step dataset plus regression stats.
* ``transient300``: 300 steps at 1 ms from cold start, capturing the 80 ms
  rise; reports the extracted time constant.
* ``comparison``: reactive vs predictive vs open-loop on the same seeded
  burst workload.
* ``fingerprint``: five-state staircase in open loop, then the six-panel
  fingerprint report.
* ``stabilization1800``: sustained 1,800 s predictive run (convenience
  extension of the standard four).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import fingerprint as fp
from .config import (
    RunConfig,
    comparison_config,
    default_config,
    fingerprint_config,
    stabilization_config,
    transient_config,
)
from .controller import run_comparison
from .errors import UsageError
from .simulate import RunResult, simulate
from .telemetry import write_csv


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    files: tuple[Path, ...]
    summary: dict
    ok: bool


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _write_run(run: RunResult, out: Path, stem: str) -> list[Path]:
    files = []
    tpath = out / f"{stem}_telemetry.csv"
    write_csv(run.frame, tpath)
    files.append(tpath)
    fpath = out / f"{stem}_forecast_log.csv"
    run.forecast_log.write_csv(fpath)
    files.append(fpath)
    return files


def _run_validation90k(config: RunConfig, out: Path, seed: int) -> ExperimentResult:
    cfg = config if config is not None else default_config(seed)
    run = simulate(cfg)
    files = _write_run(run, out, "validation90k")
    fit = fp.regress(run.frame.rho, run.frame.delta_t_c)
    summary = run.summary.to_dict() | {
        "rho_dt_fit": vars(fit) | {},
        "audit_ok": run.audit.ok,
    }
    spath = out / "validation90k_summary.json"
    _write_json(spath, summary)
    files.append(spath)
    ok = fit.r_squared >= 0.98 and run.audit.ok and \
        run.summary.peak_junction_temp_c <= 85.0
    return ExperimentResult("validation90k", tuple(files), summary, ok)


def _run_transient300(config: RunConfig, out: Path, seed: int) -> ExperimentResult:
    cfg = config if config is not None else transient_config(seed)
    run = simulate(cfg)
    files = _write_run(run, out, "transient300")
    tau_est = fp.estimate_tau(run.frame.t_ms, run.frame.delta_t_c)
    tau_cfg = cfg.thermal.tau_ms
    summary = run.summary.to_dict() | {
        "tau_est_ms": tau_est,
        "tau_configured_ms": tau_cfg,
    }
    spath = out / "transient300_summary.json"
    _write_json(spath, summary)
    files.append(spath)
    ok = abs(tau_est - tau_cfg) <= 2.0
    return ExperimentResult("transient300", tuple(files), summary, ok)


def _run_comparison(config: RunConfig, out: Path, seed: int) -> ExperimentResult:
    cfg = config if config is not None else comparison_config(seed)
    report = run_comparison(cfg)
    jpath = out / "comparison.json"
    _write_json(jpath, report.to_dict())
    tpath = out / "comparison.txt"
    tpath.write_text(report.to_text() + "\n")
    ok = report.improvement_ratio is not None and report.improvement_ratio > 1.0
    return ExperimentResult("comparison", (jpath, tpath), report.to_dict(), ok)


def _run_fingerprint(config: RunConfig, out: Path, seed: int) -> ExperimentResult:
    cfg = config if config is not None else fingerprint_config(seed)
    run = simulate(cfg)
    files = _write_run(run, out, "fingerprint")
    report = fp.build_report(run.frame, cfg)
    files.extend(fp.write_report(report, out))
    return ExperimentResult(
        "fingerprint", tuple(files), fp.report_dict(report), report.ok
    )


def _run_stabilization(config: RunConfig, out: Path, seed: int) -> ExperimentResult:
    cfg = config if config is not None else stabilization_config(seed)
    run = simulate(cfg)
    summary = run.summary.to_dict()
    spath = out / "stabilization1800_summary.json"
    _write_json(spath, summary)
    stab = run.summary.stabilization_ms
    ok = stab is not None and stab <= 50_000.0 and run.summary.stays_in_band
    return ExperimentResult("stabilization1800", (spath,), summary, ok)


_RUNNERS = {
    "validation90k": _run_validation90k,
    "transient300": _run_transient300,
    "comparison": _run_comparison,
    "fingerprint": _run_fingerprint,
    "stabilization1800": _run_stabilization,
}

EXPERIMENT_NAMES = tuple(_RUNNERS)


def run_experiment(
    name: str,
    *,
    config: RunConfig | None = None,
    out_dir="out",
    seed: int = 24,
) -> ExperimentResult:
    """Run a named experiment and write its artifact files.

    ``config`` overrides the experiment's own preset entirely (use the
    preset constructors in :mod:`cpodrift.config` as starting points).
    """
    try:
        runner = _RUNNERS[name]
    except KeyError:
        raise UsageError(
            f"unknown experiment {name!r}; expected one of {list(_RUNNERS)}"
        ) from None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return runner(config, out, seed)
