"""Vanishing-smoothing study: trajectories across a geometric ladder of
smoothing strengths form a Cauchy sequence.

One run per ladder entry on identical data; pairwise sup-in-time differences
contract by ~4x per halving of the strength (the smoothing enters through
its square).
"""

from magzak import IntegratorConfig, Params, TorusGrid, epsilon_convergence_study
from magzak import initial_data as idata

grid = TorusGrid(2, 64)
params = Params(alpha=1.0, epsilon=0.1, s=2.0)
state = idata.gaussian_packet(
    grid, params, e_norm=0.1, width=4.0, carrier=1.0, n_amp=0.3, n1_amp=0.05,
    b_amp=0.15, b1_amp=0.05,
)

cfg = IntegratorConfig(scheme="strang", dt=2e-3, t_end=0.5, diag_interval=0.05)
table = epsilon_convergence_study(state, [0.2, 0.1, 0.05, 0.025], 0.5, cfg, workers=2)

print("pair           combined diff   derivative diff")
for p in table.pairs:
    print(f"({p.eps_a:5.3f},{p.eps_b:5.3f})  {p.combined:.4e}      {p.deriv_combined:.4e}")
print("contraction ratios per halving:", [f"{r:.2f}" for r in table.ratios])
print("derivative ratios             :", [f"{r:.2f}" for r in table.deriv_ratios])
print()
print(table.to_csv())
