"""Empirical constants for the fractional product rule, its commutator
variant, and the trilinear cancellation.

The constants in these estimates are not explicit, so the study reports
sampled ratios (stable under grid refinement) rather than asserting values.
The decomposition identity J13 + J22 = 0, by contrast, is exact in the
discrete inner product and lands at machine zero.
"""

import numpy as np

from magzak import TorusGrid, kato_ponce_ratio, trilinear_cancellation

base = TorusGrid(2, 128, 2.0 * np.pi)
doubled = TorusGrid(2, 256, 2.0 * np.pi)
kcut = (base.N / 4.0) * (2.0 * np.pi / base.P)
exponents = (2.0, np.inf, 2.0, 2.0, np.inf)  # p, p1, p2, p3, p4

print("product rule and commutator ratios, 100 samples, s = 2:")
for g in (base, doubled):
    out = kato_ponce_ratio(g, 2.0, exponents, 100, seed=11, kcut=kcut)
    print(
        f"  N = {g.N:3d}: product max {out['product_max']:.4f} "
        f"(median {out['product_median']:.4f}), "
        f"commutator max {out['commutator_max']:.4f} "
        f"(median {out['commutator_median']:.4f})"
    )
print("  (same seed, same physical modes: refinement only refines quadrature)")

tri = trilinear_cancellation(TorusGrid(2, 64, 2.0 * np.pi), 2.0, 100, seed=7)
print("\ntrilinear sampling, 100 triples, s = 2:")
print(f"  max normalized |J|        : {tri['max_J_normalized']:.4e} (bounded)")
print(f"  max |J13 + J22|           : {tri['max_J13_plus_J22']:.1e} (exact cancellation)")
print(f"  max cross-product variant : {tri['max_cross_normalized']:.4e}")
