"""Low/high frequency preprocessing and the drift-corrected system.

Rough initial data for the velocity and magnetic channels is split with a
compactly supported radial cutoff; the high parts land in the negative-order
classes the energy functional needs, while the low parts become explicit
time-dependent sources.  Evolving the corrected system and undoing the
change of variables reproduces the direct evolution to splitting accuracy.
"""

import numpy as np

from magzak import IntegratorConfig, Params, TorusGrid, from_modified, run, split_initial_data
from magzak import fields as fs
from magzak import initial_data as idata

grid = TorusGrid(2, 64)
params = Params(alpha=1.0, epsilon=0.1, s=2.0)
state = idata.random_smooth(
    grid, params, seed=3, decay=4.0, kcut=2.0, e_amp=0.15, n_amp=0.3, n1_amp=0.2,
    b_amp=0.25, b1_amp=0.15,
)

modified, lfd = split_initial_data(state)
print("split of the velocity datum n_1:")
print(f"  low part  |n_1L|_L2 = {fs.l2_norm(grid, lfd.n_1L):.4e} (support |k| <= 2)")
print(f"  high part |n_1H|_L2 = {fs.l2_norm(grid, modified.n_t):.4e} (vanishes on |k| <= 1)")
neg = fs.sobolev_norm(grid, modified.n_t, -1.0, "homogeneous")
print(f"  the high part sits in the negative-order class: |n_1H|_Hdot^-1 = {neg:.4e}")

dt = 5e-3
cfg = IntegratorConfig(scheme="strang", dt=dt, t_end=0.25, diag_interval=10.0)
cfg_mod = IntegratorConfig(
    scheme="strang", dt=dt, t_end=0.25, diag_interval=10.0, modified_mode=True
)
direct = run(state, cfg).state
corrected = run(modified, cfg_mod, lfd=lfd).state
reconstructed = from_modified(corrected, lfd)

diff = fs.sobolev_norm(grid, reconstructed.E - direct.E, 1.0)
print(f"\nH1 difference direct vs reconstructed at T = 0.25: {diff:.3e}")
print(f"(both schemes are O(dt^2); bound 10 dt^2 = {10 * dt**2:.3e})")
