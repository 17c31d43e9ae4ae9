"""Ground state of the cubic scalar field equation, two independent ways.

The stabilized fixed-point iteration computes the radial profile on a fine
torus; an adaptive radial shooting integration with bisection on the center
value provides the ground truth.  Their squared masses agree to ~1e-11, and
the profile saturates the sharp L4 interpolation inequality whose best
constant it defines.
"""

import numpy as np

from magzak import petviashvili, shooting_mass
from magzak.groundstate import sharp_ratio

gs = petviashvili(2)
mass_oracle, q0 = shooting_mass(2)

print(f"fixed-point mass  : {gs.mass:.8f} (residual {gs.residual:.2e})")
print(f"shooting mass     : {mass_oracle:.8f} (center value Q(0) = {q0:.6f})")
print(f"relative deviation: {abs(gs.mass - mass_oracle) / mass_oracle:.2e}")
print(f"best constant K^4 : {gs.k4:.6f} (= 2 / mass)")

ratio_q = sharp_ratio(gs.grid, gs.Q, gs.k4, 2)
print(f"\nsharp-inequality ratio at the optimizer: {ratio_q:.10f} (exactly 1 in the limit)")

g = gs.grid
gaussian = np.exp(-np.sum((g.x - g.P / 2.0) ** 2, axis=0) / 2.0)
print(f"sharp-inequality ratio for a Gaussian  : {sharp_ratio(g, gaussian, gs.k4, 2):.6f} (< 1)")

mid = g.N // 2
print("\nradial profile along one axis:")
for i in range(0, 40, 8):
    r = i * g.P / g.N
    print(f"  r = {r:5.2f}: Q = {gs.Q[mid, mid + i]:.6e}")
