"""Spectral toolbox tour: the periodic grid, fractional derivatives, the
vector dispersion pieces, and the fourth-order smoother.

Everything here is a diagonal (or 3x3 block-diagonal) operation on Fourier
coefficients, so the classical vector-calculus identities hold to roundoff.
"""

import numpy as np

from magzak import (
    TorusGrid,
    apply_lambda,
    apply_smoother,
    curl_curl,
    dealias,
    grad_div,
)
from magzak import fields as fs

grid = TorusGrid(2, 64, 2.0 * np.pi)
print(f"domain: {grid}, {grid.modes} modes, dealias keeps "
      f"{int(np.sum(grid.dealias_mask))} of them (2/3 rule)")

# fractional Laplacian powers act mode-wise: |k|^s
f = grid.to_spectral(np.cos(2.0 * grid.x[0]))
half_inverse = apply_lambda(grid, f, -1.0)
print("Lambda^-1 cos(2x) has amplitude",
      f"{np.max(np.abs(grid.to_physical(half_inverse).real)):.3f} (exact: 0.5)")

# longitudinal modes feel grad-div, transverse modes feel curl-curl
E = np.zeros((3,) + grid.shape, dtype=complex)
E[0] = grid.to_spectral(np.exp(1j * grid.x[0]))  # k parallel to E: longitudinal
print("curl curl on longitudinal mode:", f"{np.max(np.abs(curl_curl(grid, E))):.2e} (exact: 0)")
E_t = np.zeros_like(E)
E_t[1] = E[0]  # k perpendicular to E: transverse
print("grad div on transverse mode:", f"{np.max(np.abs(grad_div(grid, E_t))):.2e} (exact: 0)")

# the identity curl curl = grad div + (-Lap) holds mode-wise
rng = np.random.default_rng(0)
R = rng.standard_normal((3,) + grid.shape) + 1j * rng.standard_normal((3,) + grid.shape)
resid = curl_curl(grid, R) - grad_div(grid, R) - grid.ksq * R
print("vector identity residual on a random field:", f"{np.max(np.abs(resid)):.2e}")

# the smoother 1/(1 + eps^2 |k|^4): contraction in every Sobolev norm
g = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
for eps in (0.0, 0.3, 0.9):
    sm = apply_smoother(grid, g, eps)
    print(f"eps = {eps}: ||L f||_H2 / ||f||_H2 = "
          f"{fs.sobolev_norm(grid, sm, 2.0) / fs.sobolev_norm(grid, g, 2.0):.4f}")

# dealiasing is an orthogonal projection: idempotent, norm non-increasing
once = dealias(grid, g)
print("dealias idempotent:", bool(np.array_equal(dealias(grid, once), once)))
