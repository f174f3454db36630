"""Leg kinematics of the reference five-bar and the size scaling argument.

    python3 demos/leg_and_scaling.py
"""
import numpy as np

from pinto_sim.linkage import LegGeometry, leg_extension, transmission_ratio, workspace_sample
from pinto_sim.scaling import ScalingModel, jump_height, scaled_height

leg = LegGeometry()
lo, hi = leg.s_range
print(f"cooperative range {lo:+.3f} .. {hi:+.3f} rad")
for s in np.linspace(lo, hi, 5):
    T = transmission_ratio(leg, min(max(s, lo + 1e-3), hi - 1e-3))
    print(f"  s={s:+.3f}  extension {leg_extension(leg, s) * 1e3:6.1f} mm  T={T * 1e3:6.1f} mm/rad")
print(f"stroke {(leg_extension(leg, hi) - leg_extension(leg, lo)) * 1e3:.1f} mm")

ws = workspace_sample(leg, 60)
print(f"{len(ws.points)} reachable foot points, x span "
      f"{np.ptp(ws.points[:, 0]) * 1e3:.0f} mm, y span {np.ptp(ws.points[:, 1]) * 1e3:.0f} mm")

# constant push over the stroke
print(f"1.42 J over a 118 mm stroke lifts 0.45 kg by "
      f"{jump_height(1.42 / 0.118, 0.118, 0.45):.4f} m")
for alpha in (2.2, 3.0, 3.5):
    m = ScalingModel(alpha=alpha)
    hs = ", ".join(f"{scaled_height(m, k):.3f}" for k in (0.5, 1.0, 2.0))
    print(f"alpha={alpha}: height at scale 0.5/1/2 = {hs} m")
