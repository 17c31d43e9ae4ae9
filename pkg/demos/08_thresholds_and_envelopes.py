"""Smallness thresholds and the closed-form continuation utilities.

The global-existence conditions compare the L2 mass of the field envelope
against the ground-state mass (d = 2) or against 1/(27 K^8 |psi(0)|) with a
gradient-mass side condition (d = 3).  The bootstrap root and the blow-up
envelope are the scalar tools behind the a-priori bounds.
"""

import numpy as np

from magzak import (
    Params,
    TorusGrid,
    bootstrap_root,
    gronwall_envelope,
    psi,
    shooting_mass,
    threshold_report,
)
from magzak import initial_data as idata

grid = TorusGrid(2, 64)
params = Params(alpha=1.0, epsilon=0.0, s=2.0)
q_mass, _ = shooting_mass(2)

print("threshold check for packets of growing mass (d = 2):")
for e_norm in (0.5, 2.0, 2.5):
    state = idata.gaussian_packet(grid, params, e_norm=e_norm, n_amp=0.1)
    report = threshold_report(grid, state.E, psi(state), q_mass)
    print(
        f"  ||E0||_L2 = {e_norm}: 2 ||E0||^2 = {2 * report.E0_mass:.3f} vs "
        f"||Q||^2 = {q_mass:.3f} -> margin {report.margin:.3f}, passed = {report.passed}"
    )

print("\nbootstrap root for f <= a + b f^kappa:")
out = bootstrap_root(1.0, 1.0 / 8.0, 2.0)
print(f"  (a, b, kappa) = (1, 1/8, 2): trapped below x1 = {out['x1']:.9f} "
      f"(closed form 4 - 2 sqrt 2 = {4 - 2 * np.sqrt(2):.9f})")
print(f"  (a, b, kappa) = (1, 1/4, 2): condition holds = {bootstrap_root(1, 0.25, 2)['condition']} "
      "(equality is excluded)")

print("\nblow-up envelope for u <= A1 + A2 int u^kappa:")
env = gronwall_envelope(1.0, 1.0, 1.5)
print(f"  (A1, A2, kappa) = (1, 1, 3/2): T* = {env.T_star}")
for t in (0.0, 1.0, 1.9, 1.99):
    print(f"    v({t}) = {env(t):.4f}")
