"""Conserved-quantity drift along a coupled run.

The mass-type functional (L2 mass of E plus the smoothing correction) is
conserved by every substep of the splitting, so its drift sits at roundoff.
The energy-type functional mixes the channels through two cubic couplings;
its drift measures the splitting error and shrinks like dt^2.
"""

from magzak import IntegratorConfig, Params, TorusGrid, run
from magzak import initial_data as idata

grid = TorusGrid(2, 64)  # period 16 pi
params = Params(alpha=1.0, epsilon=0.1, s=2.0)
state = idata.gaussian_packet(
    grid, params, e_norm=0.1, width=2.5, carrier=2.0, n_amp=0.5, n1_amp=0.1,
    b_amp=0.25, b1_amp=0.05,
)

print("t      phi drift    psi drift")
cfg = IntegratorConfig(scheme="strang", dt=1e-3, t_end=0.5, diag_interval=0.1)
result = run(state, cfg)
for rec in result.records:
    print(f"{rec.time:4.2f}   {rec.drift_phi:.3e}   {rec.drift_psi:.3e}")

print("\nhalving dt divides the psi drift by ~4 (second-order splitting):")
for dt in (2e-3, 1e-3):
    cfg = IntegratorConfig(scheme="strang", dt=dt, t_end=0.5, diag_interval=0.1)
    worst = max(r.drift_psi for r in run(state, cfg).records)
    print(f"  dt = {dt}: max psi drift {worst:.3e}")
