"""Why R = 0.61: torque curves of the buckling-strip spring.

Keeps the input arm and the strip fixed and lengthens the output arm, then
prints how flat each torque curve is once the strip has buckled. Also sums
the energy of the four reference packs.

    python3 demos/spring_design.py
"""
import numpy as np

from pinto_sim.jumpdyn import default_springs
from pinto_sim.spring import (buckling_angle, critical_load, pack_energy, spring_torque,
                              torque_curve, torque_variation)

springs = default_springs()
ref = springs[0]
g = ref.geometry
print(f"arms L1={g.L1 * 1e3:.1f} mm, L2={g.L2 * 1e3:.1f} mm, rest angle {g.phi_rest:.3f} rad")
print(f"centre pack Euler load {critical_load(ref.strip):.1f} N, "
      f"buckles at phi={buckling_angle(ref):.4f} rad")

phi_b = buckling_angle(ref)
for c in torque_curve(ref, [0.61, 0.92, 1.22], 301):
    loaded = c.torque[c.phi <= phi_b]
    print(f"R={c.ratio:4.2f}: peak {c.torque.max():6.3f} N m, "
          f"CoV after buckling {torque_variation(c, phi_b):.3f}, "
          f"zero-torque samples {np.sum(loaded == 0)}")

# a few points on the reference curve
for phi in np.linspace(g.phi_rest, g.phi_min, 6):
    print(f"  phi={phi:.3f} rad  tau={spring_torque(ref, phi):.4f} N m")

print(f"four packs, rest to full compression: {pack_energy(springs):.3f} J")
