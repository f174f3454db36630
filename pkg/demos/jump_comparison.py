"""Rigid, series-elastic and latched parallel-elastic jumps side by side.

Runs the reference robot in all three modes and prints the takeoff energy,
propulsion time and average DC power, then walks through the PEA events.

    python3 demos/jump_comparison.py
"""
from pinto_sim.jumpdyn import RobotConfig, compare_modes

cfg = RobotConfig()
rows = compare_modes(cfg)

print(f"{'mode':>6} {'E (J)':>7} {'t (ms)':>7} {'P (W)':>7} {'apex (m)':>9}")
for r in rows:
    print(f"{r['mode']:>6} {r['energy_J']:7.3f} {r['time_ms']:7.1f} "
          f"{r['avg_dc_power_W']:7.1f} {r['apex_m']:9.3f}")

rigid, pea = rows[0], rows[2]
print(f"PEA energy gain {pea['energy_J'] / rigid['energy_J'] - 1:+.1%}, "
      f"time {pea['time_ms'] / rigid['time_ms'] - 1:+.1%}")
print(f"PEA loading {pea['loading_ms']:.1f} ms, then "
      f"{pea['time_ms'] - pea['loading_ms']:.1f} ms of propulsion")

res = pea["result"]
for t, name in res.events:
    print(f"  {t * 1e3:8.2f} ms  {name}")
tr = res.traces
i = tr["grf_N"].argmax()
print(f"peak ground force {tr['grf_N'][i]:.1f} N at {tr['t_s'][i] * 1e3:.1f} ms")
