"""First-order RC thermal plant and series boundary stack.

Heat flows from the electronic die into the photonic substrate through a
lumped RC network: the temperature delta responds to a dissipation delta
``dP`` with steady-state gain ``gamma * r_th`` and time constant ``tau``.
The integrator uses the exact exponential update for piecewise-constant
power, so composing many small steps equals one large step to rounding
error and the steady-state gain holds exactly.

Nominal calibration: r_th = 0.451 C/W, tau = 80 ms, gamma = 1, giving the
reference 0.451 * 82 = 36.982 C rise for an 82 W idle-to-peak swing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InputError, StepSizeError


@dataclass(frozen=True)
class CouplingConfig:
    """Spatial coupling model across the die-to-substrate separation."""

    d_ref_um: float = 10.0     # separation at which coupling is unity
    d_decay_um: float = 5.0    # e-folding length of the decay


def gamma_of_distance(d_um: float, coupling: CouplingConfig = CouplingConfig()) -> float:
    """Dimensionless coupling factor: exp(-(d - d_ref)/d_decay), clamped to (0, 1].

    Separations at or inside the reference distance couple fully (1.0).
    """
    if not d_um > 0:
        raise InputError(f"d_um must be > 0, got {d_um}")
    g = math.exp(-(d_um - coupling.d_ref_um) / coupling.d_decay_um)
    return min(g, 1.0)


@dataclass(frozen=True)
class ThermalParams:
    """Plant parameters.

    ``p_baseline_w`` is the operating point power that defines the zero of
    the temperature delta; all power inputs to :func:`step` are deltas above
    it (default 0 W, so idle dissipation produces a nonzero delta).
    """

    r_th: float = 0.451        # C/W, junction-to-substrate
    tau_ms: float = 80.0       # RC time constant
    gamma: float = 1.0         # spatial coupling, (0, 1]
    d_um: float | None = None  # optional separation; overrides gamma when set
    ambient_c: float = 45.0    # package reference temperature at idle
    p_baseline_w: float = 0.0

    def __post_init__(self) -> None:
        if not self.r_th > 0:
            raise ConfigError(f"thermal.r_th must be > 0, got {self.r_th}")
        if not self.tau_ms > 0:
            raise ConfigError(f"thermal.tau_ms must be > 0, got {self.tau_ms}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"thermal.gamma must be in (0, 1], got {self.gamma}")

    @property
    def gain(self) -> float:
        """Steady-state gain gamma * r_th, C/W."""
        return self.gamma * self.r_th

    def with_distance(self, coupling: CouplingConfig = CouplingConfig()) -> "ThermalParams":
        """Resolve gamma from the configured separation, if any."""
        if self.d_um is None:
            return self
        return replace(self, gamma=gamma_of_distance(self.d_um, coupling))


@dataclass(frozen=True)
class ThermalState:
    """Lumped plant state at time t_ms."""

    delta_t_c: float = 0.0
    last_power_w: float = 0.0
    t_ms: float = 0.0


def steady_state_delta_t(r_th: float, delta_p_w: float, gamma: float = 1.0) -> float:
    """Converged temperature delta for a constant dissipation delta."""
    if not r_th > 0:
        raise InputError(f"r_th must be > 0, got {r_th}")
    return gamma * r_th * delta_p_w


def step_response_fraction(t_ms: float, tau_ms: float) -> float:
    """Fraction of the final value reached t_ms after a step: 1 - exp(-t/tau)."""
    if not tau_ms > 0:
        raise InputError(f"tau_ms must be > 0, got {tau_ms}")
    if t_ms < 0:
        raise InputError(f"t_ms must be >= 0, got {t_ms}")
    return 1.0 - math.exp(-t_ms / tau_ms)


def step(
    state: ThermalState,
    power_w: float,
    dt_ms: float,
    params: ThermalParams = ThermalParams(),
) -> ThermalState:
    """Advance the plant by dt_ms under a constant dissipation delta.

    ``power_w`` is the delta above ``params.p_baseline_w`` held over
    [t, t + dt). The update

        dT' = dT * exp(-dt/tau) + gain * dP * (1 - exp(-dt/tau))

    is the analytic response to piecewise-constant input, so no
    discretization error accumulates regardless of dt.
    """
    if not dt_ms > 0:
        raise StepSizeError(f"dt_ms must be > 0, got {dt_ms}")
    decay = math.exp(-dt_ms / params.tau_ms)
    target = params.gain * power_w
    new_delta = state.delta_t_c * decay + target * (1.0 - decay)
    return ThermalState(
        delta_t_c=new_delta, last_power_w=power_w, t_ms=state.t_ms + dt_ms
    )


# ---------------------------------------------------------------------------
# series boundary stack

DEFAULT_BOUNDARY_NAMES = ("Junction-to-Case", "Case-to-Heatsink", "Heatsink-to-Ambient")
DEFAULT_BOUNDARY_CUMULATIVE = (0.812, 1.407, 1.995)  # C/W, outward from junction


@dataclass(frozen=True)
class BoundaryStack:
    """Series thermal boundaries, junction outward to ambient.

    ``cumulative`` is authoritative (the calibration is specified as
    cumulative milestones); per-stage resistances are its differences.
    """

    names: tuple[str, ...] = DEFAULT_BOUNDARY_NAMES
    cumulative: tuple[float, ...] = DEFAULT_BOUNDARY_CUMULATIVE

    def __post_init__(self) -> None:
        if len(self.names) != len(self.cumulative):
            raise ConfigError("boundary stack: names and cumulative lengths differ")
        if not self.cumulative:
            raise ConfigError("boundary stack: at least one stage required")
        prev = 0.0
        for i, c in enumerate(self.cumulative):
            if not c > prev:
                raise ConfigError(
                    f"boundary stack: cumulative[{i}] = {c} must exceed {prev}"
                )
            prev = c

    @property
    def stages(self) -> tuple[tuple[str, float], ...]:
        """(name, per-stage resistance) pairs, junction outward."""
        prev = 0.0
        out = []
        for name, c in zip(self.names, self.cumulative):
            out.append((name, c - prev))
            prev = c
        return tuple(out)

    @classmethod
    def from_stages(cls, stages) -> "BoundaryStack":
        names = tuple(n for n, _ in stages)
        cumulative = tuple(np.cumsum([r for _, r in stages]).tolist())
        return cls(names=names, cumulative=cumulative)


def boundary_temperatures(
    stack: BoundaryStack, delta_p_w: float, ambient_c: float
) -> tuple[tuple[str, float], ...]:
    """Absolute temperature at each boundary: ambient + cumulative_k * dP.

    Returned junction-first (outermost stage last).
    """
    if delta_p_w < 0:
        raise InputError(f"delta_p_w must be >= 0, got {delta_p_w}")
    return tuple(
        (name, ambient_c + c * delta_p_w)
        for name, c in zip(stack.names, stack.cumulative)
    )


def junction_temperature(
    delta_p_w: float, params: ThermalParams = ThermalParams()
) -> float:
    """Absolute junction temperature for a dissipation delta above idle.

    The reference temperature (``ambient_c``) is the package temperature at
    the idle operating point, so only the rise above idle is added.
    """
    return params.ambient_c + steady_state_delta_t(params.r_th, delta_p_w, params.gamma)
