"""First-order thermal plant: exact integrator and the 63.2% landmark.

An 82 W idle-to-peak power swing through 0.451 C/W gives a 36.982 C
steady-state rise with an 80 ms time constant. The integrator is exact for
piecewise-constant power, so step size is a reporting choice, not an
accuracy knob.
"""

from cpodrift import (
    BoundaryStack,
    ThermalParams,
    ThermalState,
    boundary_temperatures,
    steady_state_delta_t,
    step,
    step_response_fraction,
)

params = ThermalParams()
ss = steady_state_delta_t(params.r_th, 82.0, params.gamma)
print(f"steady state for an 82 W swing: {ss:.3f} C")

s = ThermalState()
print("\nstep response (1 ms steps):")
for t in (20, 50, 80, 160, 240, 400):
    while s.t_ms < t:
        s = step(s, 82.0, 1.0, params)
    frac = s.delta_t_c / ss
    print(f"  t={t:>3} ms  dT={s.delta_t_c:7.3f} C  ({frac:6.2%}; "
          f"analytic {step_response_fraction(t, params.tau_ms):6.2%})")

one = step(ThermalState(), 82.0, 80.0, params)
s80 = ThermalState()
for _ in range(80):
    s80 = step(s80, 82.0, 1.0, params)
print(f"\none 80 ms step vs eighty 1 ms steps: "
      f"{one.delta_t_c:.12f} vs {s80.delta_t_c:.12f}")

print("\nseries boundary stack at 82 W (45 C reference):")
for name, temp in boundary_temperatures(BoundaryStack(), 82.0, 45.0):
    print(f"  {name:<20} {temp:7.2f} C")
print(f"junction absolute peak: {45.0 + ss:.3f} C (ceiling 85 C)")
