"""Exact linear solution operators as closed-form Fourier multipliers.

Three flows are covered: the unitary group of the smoothed Schroedinger
dispersion (longitudinal/transverse eigenvalues |k|^2 and alpha |k|^2, both
damped by 1/(1+eps^2|k|^4)), the free wave flow for the density channel, and
the fourth-order "plate" flow for the magnetic channel with dispersion
omega(k) = |k| (1+|k|^2)^{1/2}.  Duhamel steps add Simpson quadrature of a
sampled forcing against the exact kernels.
"""

import numpy as np

from .errors import QuadratureUnderflow
from .grid import check_finite, check_zero_mean


# -- Schroedinger group -------------------------------------------------------


def schrodinger_phases(grid, t, params):
    """Per-mode unimodular phases (longitudinal, transverse) of U(t)."""
    damp = grid.ksq / (1.0 + params.epsilon**2 * grid.ksq**2)
    return np.exp(-1j * t * damp), np.exp(-1j * t * params.alpha * damp)


def apply_split_phases(grid, E, phase_long, phase_trans):
    """Multiply the longitudinal part (along k) and the orthogonal complement
    of a spectral 3-vector field by separate scalar symbols.

    Written as phase_t E + (phase_l - phase_t) E_long so equal phases act
    bitwise-identically on the whole field (in particular t = 0 is exact).
    """
    ksq_safe = np.where(grid.ksq > 0, grid.ksq, 1.0)
    amp = np.einsum("j...,j...->...", grid.k3, E) / ksq_safe
    return phase_trans * E + (phase_long - phase_trans) * (grid.k3 * amp)


def schrodinger_group(grid, E, t, params):
    """Apply the unitary group U(t) of i E_t = L A E.  Preserves every H^s norm."""
    check_finite(E, "schrodinger_group input")
    pl, pt = schrodinger_phases(grid, t, params)
    return apply_split_phases(grid, E, pl, pt)


# -- free wave and plate flows -------------------------------------------------


def _rotation_symbols(omega, t):
    """cos(omega t), sin(omega t)/omega (limit t at omega = 0), -omega sin(omega t)."""
    wt = omega * t
    c = np.cos(wt)
    small = omega == 0
    omega_safe = np.where(small, 1.0, omega)
    s_over = np.where(small, t, np.sin(wt) / omega_safe)
    minus_ws = -omega * np.sin(wt)
    return c, s_over, minus_ws


def wave_dispersion(grid):
    """omega(k) = |k| for the free wave equation n_tt = Lap n."""
    return grid.kabs


def plate_dispersion(grid):
    """omega(k) = |k| (1+|k|^2)^{1/2} for B_tt + Lap^2 B - Lap B = 0."""
    return grid.kabs * np.sqrt(1.0 + grid.ksq)


def _free_flow(grid, u, u_t, t, omega):
    c, s_over, minus_ws = _rotation_symbols(omega, t)
    return c * u + s_over * u_t, minus_ws * u + c * u_t


def wave_free(grid, n, n_t, t):
    """Exact free wave evolution of (n, n_t); conserves each mode's energy."""
    check_zero_mean(grid, n_t, "wave_free n_t")
    return _free_flow(grid, n, n_t, t, wave_dispersion(grid))


def plate_free(grid, B, B_t, t):
    """Exact free plate evolution of (B, B_t) at frequency |k|<k>."""
    check_zero_mean(grid, B, "plate_free B")
    check_zero_mean(grid, B_t, "plate_free B_t")
    return _free_flow(grid, B, B_t, t, plate_dispersion(grid))


# -- Duhamel steps --------------------------------------------------------------


def _duhamel_step(grid, u, u_t, forcing_samples, dt, omega):
    """One step of u_tt + omega^2 u = F: free flow plus Simpson quadrature of
    the variation-of-constants kernel over [0, dt].

    ``forcing_samples`` holds the spectral forcing at the three nodes
    (0, dt/2, dt).  Local accuracy O(dt^5) for smooth forcing.
    """
    if not dt > 0:
        raise QuadratureUnderflow(f"quadrature step must be positive, got {dt}")
    if len(forcing_samples) != 3:
        raise QuadratureUnderflow(
            f"expected forcing at 3 Simpson nodes, got {len(forcing_samples)}"
        )
    u_new, ut_new = _free_flow(grid, u, u_t, dt, omega)
    F0, Fm, F1 = forcing_samples
    w = dt / 6.0
    # kernel evaluated at the remaining flight time dt - tau per node
    for theta, F, weight in ((dt, F0, w), (dt / 2.0, Fm, 4.0 * w), (0.0, F1, w)):
        c, s_over, _ = _rotation_symbols(omega, theta)
        u_new = u_new + weight * s_over * F
        ut_new = ut_new + weight * c * F
    return u_new, ut_new


def duhamel_wave(grid, n, n_t, forcing_samples, dt):
    """Wave step with forcing (the density channel's Delta |E|^2)."""
    return _duhamel_step(grid, n, n_t, forcing_samples, dt, wave_dispersion(grid))


def duhamel_plate(grid, B, B_t, forcing_samples, dt):
    """Plate step with forcing (the magnetic channel's Delta^2 spin density)."""
    return _duhamel_step(grid, B, B_t, forcing_samples, dt, plate_dispersion(grid))
