"""Lock-step co-simulation engine.

Per step: dispatch the planned workload slice, map density to throughput
and power, issue the look-ahead hint (optionally throttling), advance the
compensator, advance the thermal plant, convert the residual to drift, and
record one telemetry row. Everything is a pure function of (config, seed).

Two interchangeable engines cover the loop:

* ``vector``: closed-form recursion via one-pole IIR filters
  (scipy.signal.lfilter), exact for piecewise-constant inputs and fast
  enough for multi-million-step runs. It cannot apply throttle deferrals.
* ``reference``: the literal composition of the module-level operations
  (Filtration snapshots, forecast(), control_step(), thermal.step()),
  used for small runs, for throttling, and as the equivalence oracle for
  the vectorized path.

``engine="auto"`` picks vector unless the throttle would fire.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from . import thermal as th
from .config import RunConfig
from .controller import CompensationState, Mode, control_step
from .errors import ConfigError
from .scheduler import (
    AuditReport,
    Filtration,
    ForecastLog,
    QueueEntry,
    causality_audit,
    forecast,
    preposition_fraction,
    throttle_decision,
)
from .telemetry import TelemetryFrame
from .workload import (
    WorkloadPlan,
    density_to_power,
    density_to_throughput,
    generate_workload,
)

STABILIZATION_BAND_C = 0.05     # | trailing-mean residual - cap | tolerance
_STAB_WINDOW_MS = 1000.0


@dataclass(frozen=True)
class SimulationSummary:
    steps: int
    duration_ms: float
    max_residual_c: float = 0.0
    mean_residual_c: float = 0.0
    max_drift_nm: float = 0.0
    mean_drift_nm: float = 0.0
    peak_delta_t_c: float = 0.0
    peak_junction_temp_c: float = 0.0
    eta_min: float = 0.0
    eta_max: float = 0.0
    stabilization_ms: float | None = None   # trailing mean enters cap +/- band
    stays_in_band: bool = False
    mean_rho_by_state: dict[str, float] = field(default_factory=dict)
    throttle_deferrals: int = 0
    audit_violations: int = 0

    def to_dict(self) -> dict:
        d = dict(vars(self))
        d["mean_rho_by_state"] = dict(self.mean_rho_by_state)
        return d


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    frame: TelemetryFrame
    summary: SimulationSummary
    forecast_log: ForecastLog
    audit: AuditReport


def _steps_of(ms: float, dt: float) -> int:
    return int(round(ms / dt))


def _window_mean_power(P: np.ndarray, t: np.ndarray, k: int, window_steps: int,
                       half_life_ms: float) -> float:
    """Half-life weighted mean of the trailing power window ending at k."""
    lo = max(0, k - window_steps + 1)
    seg = P[lo:k + 1]
    w = 0.5 ** ((t[k] - t[lo:k + 1]) / half_life_ms)
    return float(np.dot(w, seg) / np.sum(w))


def _empty_result(config: RunConfig) -> RunResult:
    frame = TelemetryFrame.empty()
    summary = SimulationSummary(steps=0, duration_ms=0.0)
    return RunResult(config=config, frame=frame, summary=summary,
                     forecast_log=ForecastLog(),
                     audit=AuditReport(n_checked=0, violations=()))


def simulate(config: RunConfig, *, engine: str = "auto") -> RunResult:
    """Run the co-simulation described by ``config``.

    Deterministic per (config, seed): byte-identical telemetry and forecast
    logs across repeated runs.
    """
    if engine not in ("auto", "vector", "reference"):
        raise ConfigError(f"engine: unknown engine {engine!r}")
    plan = generate_workload(config.workload, config.seed)
    if plan.step_count == 0:
        return _empty_result(config)

    if engine == "reference":
        return _simulate_reference(config, plan)

    fires = _throttle_would_fire(config, plan)
    if engine == "vector" and fires:
        raise ConfigError(
            "throttle would fire on this run; the vectorized engine cannot "
            "apply deferrals (use engine='reference' or 'auto')"
        )
    if fires:
        return _simulate_reference(config, plan)
    return _simulate_vector(config, plan)


def _throttle_would_fire(config: RunConfig, plan: WorkloadPlan) -> bool:
    sc = config.scheduler
    if not sc.throttle_enabled:
        return False
    thermal = config.thermal_resolved
    p_max = float(density_to_power(plan.rho.max(), config.affine_map))
    projected = (1.0 - sc.throttle_compensation_gain) * thermal.gain * max(
        0.0, p_max - thermal.p_baseline_w
    )
    return projected > sc.throttle_cap_c


# ---------------------------------------------------------------------------
# vectorized engine

def _one_pole(x: np.ndarray, pole: float, gain_in: float, y_prev: float) -> np.ndarray:
    """y[n] = pole * y[n-1] + gain_in * x[n], continuing from y_prev."""
    b = np.asarray([gain_in])
    a = np.asarray([1.0, -pole])
    zi = np.asarray([pole * y_prev])
    y, _ = lfilter(b, a, x, zi=zi)
    return y


def _simulate_vector(config: RunConfig, plan: WorkloadPlan) -> RunResult:
    sc = config.scheduler
    cp = config.controller
    thermal = config.thermal_resolved
    dt = plan.step_period_ms
    N = plan.step_count
    t = plan.t_ms

    P = density_to_power(plan.rho, config.affine_map)
    t24 = density_to_throughput(plan.rho, config.affine_map)

    decay = math.exp(-dt / thermal.tau_ms)
    dT = _one_pole(thermal.gain * (P - thermal.p_baseline_w), decay,
                   1.0 - decay, 0.0)

    # hint stream: queue replay at t + horizon; half-life weighted history
    # mean where the plan no longer covers the slot
    h_steps = _steps_of(sc.horizon_ms, dt)
    adm_steps = _steps_of(sc.admission_lead_ms, dt)
    win_steps = max(1, _steps_of(sc.history_window_ms, dt))
    eta = preposition_fraction(sc.horizon_ms, sc.tau_th_ms)

    F = np.empty(N)
    newest = np.empty(N)
    source = np.zeros(N, dtype=int)
    replay_until = N - h_steps if sc.forecaster == "queue_replay" else 0
    if replay_until > 0:
        j = np.arange(replay_until) + h_steps
        F[:replay_until] = P[j]
        newest[:replay_until] = np.maximum(0, (j - adm_steps)) * dt
    for k in range(max(0, replay_until), N):
        F[k] = _window_mean_power(P, t, k, win_steps, sc.ewma_half_life_ms)
        newest[k] = t[k]
        source[k] = 1

    # pending queue depth: admitted dispatches after the current step
    cn = np.concatenate(([0], np.cumsum(plan.n_streams)))
    hi = np.minimum(np.arange(N) + adm_steps, N - 1)
    queue_depth = cn[hi + 1] - cn[np.arange(N) + 1]
    ttft = queue_depth * sc.t_slice_ms * 0.5

    # controller
    mode = cp.mode
    g = cp.tracking_factor(dt)
    setpoint = cp.setpoint_c
    if mode is Mode.OPEN_LOOP:
        bias = np.zeros(N)
    elif mode is Mode.REACTIVE:
        lag = _steps_of(cp.sensor_latency_ms, dt)
        sensed = np.concatenate((np.zeros(min(lag, N)), dT[:max(0, N - lag)])) \
            if lag > 0 else dT
        target = np.maximum(0.0, sensed - setpoint)
        bias = _one_pole(target, 1.0 - g, g, 0.0)
    else:
        lead = min(max(1, _steps_of(cp.lead_ms, dt)), h_steps)
        warm = h_steps - lead
        # until the hint FIFO matures, anticipate with the preposition blend
        # of current plant state and hint-implied steady state at the lead
        wl = 1.0 - math.exp(-(lead * dt) / thermal.tau_ms)
        upto = min(warm + 1, N)
        ahead = np.empty(N)
        ahead[:upto] = (1.0 - wl) * dT[:upto] + wl * thermal.gain * (
            F[:upto] - thermal.p_baseline_w
        )
        if N > warm + 1:
            # matured: replica integrates the hint stream at the lead delay
            q = thermal.gain * (F[1:N - warm] - thermal.p_baseline_w)
            ahead[warm + 1:] = _one_pole(q, decay, 1.0 - decay, ahead[warm])
        target = np.maximum(0.0, np.maximum(dT, ahead) - setpoint)
        bias = _one_pole(target, 1.0 - g, g, 0.0)

    residual = np.abs(dT - bias)
    drift_nm = config.optics.kappa_to * residual

    frame = TelemetryFrame(
        step=np.arange(N, dtype=np.int64),
        t_ms=t,
        load_state=[plan.state_names[i] for i in plan.state_idx],
        rho=plan.rho,
        t24=t24,
        p_eic_w=P,
        hint_w=F,
        eta=np.full(N, eta),
        delta_t_c=dT,
        bias_c=bias,
        residual_c=residual,
        drift_nm=drift_nm,
        queue_depth=queue_depth.astype(np.int64),
        ttft_ms=ttft,
    )
    log = ForecastLog.from_arrays(t, np.full(N, sc.horizon_ms), F, newest, source)
    return _finish(config, plan, frame, log, throttle_deferrals=0)


# ---------------------------------------------------------------------------
# reference engine (module composition; supports throttling)

def _simulate_reference(config: RunConfig, plan: WorkloadPlan) -> RunResult:
    sc = config.scheduler
    cp = config.controller
    thermal = config.thermal_resolved
    optic = config.optics
    wmap = config.affine_map
    dt = plan.step_period_ms
    N = plan.step_count
    t = plan.t_ms

    h_steps = _steps_of(sc.horizon_ms, dt)
    adm_steps = _steps_of(sc.admission_lead_ms, dt)
    slice_steps = max(1, _steps_of(sc.t_slice_ms, dt))
    win_steps = max(1, _steps_of(sc.history_window_ms, dt))

    # dispatch slots: step index -> list of queue entries
    slots: dict[int, list[QueueEntry]] = {}

    def admit(j: int, admitted_ms: float) -> None:
        if 0 <= j < N:
            slots.setdefault(j, []).append(QueueEntry(
                dispatch_t_ms=float(t[j]), rho=float(plan.rho[j]),
                n_streams=int(plan.n_streams[j]), admitted_t_ms=admitted_ms,
            ))

    for j in range(min(adm_steps, N)):
        admit(j, 0.0)

    history: list[tuple[float, float]] = []
    plant = th.ThermalState()
    ctrl = CompensationState()
    log = ForecastLog()

    cols: dict[str, list] = {k: [] for k in (
        "rho", "t24", "p", "hint", "dT", "bias", "residual", "drift", "qd",
    )}
    state_col: list[str] = []
    deferrals = 0

    for k in range(N):
        admit(k + adm_steps, float(t[k]))

        executing = slots.pop(k, [])
        rho_k = sum(e.rho for e in executing)
        p_k = density_to_power(rho_k, wmap)
        t24_k = density_to_throughput(rho_k, wmap)

        history.append((float(t[k]), p_k))
        if len(history) > win_steps:
            history.pop(0)

        pending = [e for js in sorted(slots) if js > k for e in slots[js]]
        qd = sum(e.n_streams for e in pending)
        snapshot = Filtration(
            now_ms=float(t[k]),
            power_history=tuple(history),
            queue=tuple(pending),
            queue_depth=qd,
            slot_ms=dt,
        )
        hint = forecast(snapshot, float(t[k]), sc.horizon_ms, sc, wmap)
        log.append(hint)

        if sc.throttle_enabled:
            decision = throttle_decision(
                hint, sc.throttle_cap_c, thermal,
                compensation_gain=sc.throttle_compensation_gain,
                map_params=wmap,
            )
            if decision.fired:
                deferrals += len(decision.deferred)
                j = k + h_steps
                kept = [
                    e for e in slots.get(j, [])
                    if not any(e is d for d in decision.deferred)
                ]
                slots[j] = kept
                for e in decision.deferred:
                    admit_j = j + slice_steps
                    if admit_j < N:
                        slots.setdefault(admit_j, []).append(
                            replace(e, dispatch_t_ms=float(t[admit_j]))
                        )

        plant = th.step(plant, p_k - thermal.p_baseline_w, dt, thermal)
        ctrl = control_step(ctrl, plant.delta_t_c, hint, dt, cp, thermal, optic)

        state_col.append(plan.state_name(k))
        cols["rho"].append(rho_k)
        cols["t24"].append(t24_k)
        cols["p"].append(p_k)
        cols["hint"].append(hint.forecast_w)
        cols["dT"].append(plant.delta_t_c)
        cols["bias"].append(ctrl.bias_delta_t_c)
        cols["residual"].append(ctrl.residual_delta_t_c)
        cols["drift"].append(ctrl.residual_drift_nm)
        cols["qd"].append(qd)

    eta = preposition_fraction(sc.horizon_ms, sc.tau_th_ms)
    qd_arr = np.asarray(cols["qd"], dtype=np.int64)
    frame = TelemetryFrame(
        step=np.arange(N, dtype=np.int64),
        t_ms=t,
        load_state=state_col,
        rho=np.asarray(cols["rho"]),
        t24=np.asarray(cols["t24"]),
        p_eic_w=np.asarray(cols["p"]),
        hint_w=np.asarray(cols["hint"]),
        eta=np.full(N, eta),
        delta_t_c=np.asarray(cols["dT"]),
        bias_c=np.asarray(cols["bias"]),
        residual_c=np.asarray(cols["residual"]),
        drift_nm=np.asarray(cols["drift"]),
        queue_depth=qd_arr,
        ttft_ms=qd_arr * sc.t_slice_ms * 0.5,
    )
    return _finish(config, plan, frame, log, throttle_deferrals=deferrals)


# ---------------------------------------------------------------------------
# summary

def _finish(config: RunConfig, plan: WorkloadPlan, frame: TelemetryFrame,
            log: ForecastLog, throttle_deferrals: int) -> RunResult:
    thermal = config.thermal_resolved
    dt = plan.step_period_ms
    N = frame.n

    audit = causality_audit(log, np.column_stack((frame.t_ms, frame.p_eic_w)))

    idle_ss = thermal.gain * (config.affine_map.p_idle_w - thermal.p_baseline_w)
    peak_delta = float(frame.delta_t_c.max())
    cap = config.controller.residual_cap_c

    stab_ms = None
    stays = False
    window = max(1, _steps_of(_STAB_WINDOW_MS, dt))
    if N >= window:
        c = np.concatenate(([0.0], np.cumsum(frame.residual_c)))
        trailing = (c[window:] - c[:-window]) / window
        inband = np.abs(trailing - cap) <= STABILIZATION_BAND_C
        hits = np.nonzero(inband)[0]
        if hits.size:
            first = int(hits[0])
            stab_ms = float((first + window) * dt)
            stays = bool(inband[first:].all())

    by_state: dict[str, float] = {}
    for i, name in enumerate(plan.state_names):
        mask = plan.state_idx == i
        if mask.any():
            by_state[name] = float(frame.rho[mask].mean())

    summary = SimulationSummary(
        steps=N,
        duration_ms=float(N * dt),
        max_residual_c=float(frame.residual_c.max()),
        mean_residual_c=float(frame.residual_c.mean()),
        max_drift_nm=float(frame.drift_nm.max()),
        mean_drift_nm=float(frame.drift_nm.mean()),
        peak_delta_t_c=peak_delta,
        peak_junction_temp_c=thermal.ambient_c + peak_delta - idle_ss,
        eta_min=float(frame.eta.min()),
        eta_max=float(frame.eta.max()),
        stabilization_ms=stab_ms,
        stays_in_band=stays,
        mean_rho_by_state=by_state,
        throttle_deferrals=throttle_deferrals,
        audit_violations=len(audit.violations),
    )
    return RunResult(config=config, frame=frame, summary=summary,
                     forecast_log=log, audit=audit)
