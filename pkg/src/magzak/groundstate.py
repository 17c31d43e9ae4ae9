"""Ground state Q of the cubic scalar field equation and the derived constants.

The equation is a Lap Q - b Q + Q^3 = 0 with a = d/2 and b = 2 - d/2 (so the
plain Lap Q - Q + Q^3 = 0 in two dimensions).  Two independent routes:

* ``petviashvili``: stabilized fixed-point iteration on a fine torus grid,
  Q_{m+1} = S_m^{3/2} (b - a Lap)^{-1} Q_m^3 with the standard power 3/2 for
  a cubic nonlinearity;
* ``shooting_mass``: radial ODE shooting with bisection on Q(0), the oracle
  that anchors the grid computation (d = 2 mass ~ 11.70).

The squared mass sets the best constant K^4(d) = 2 / ||Q||^2 of the sharp
L^4 interpolation inequality, which feeds the smallness thresholds.
"""

import struct
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import fields as fs
from . import grid as sg
from .errors import BoundaryContamination, DomainError, NoConvergence, SnapshotVersionMismatch

_GS_RECORD = b"GS"

# Default tori: periods chosen so that the exponential tail of Q sits below
# 1e-12 at the boundary (decay rate 1 in d = 2 and 1/sqrt(3) in d = 3), and
# N so that the spectral ringing floor also stays below the boundary check.
_DEFAULT_GRID = {2: (512, 56.0), 3: (256, 80.0)}


@dataclass
class GroundState:
    """Converged radial profile with its mass, residual, and best constant."""

    d: int
    grid: sg.TorusGrid
    Q: np.ndarray           # physical, real
    mass: float             # ||Q||_L2^2
    residual: float         # ||a Lap Q - b Q + Q^3||_L2
    tol: float
    stabilizer: float       # final value of the stabilizing factor S_m

    @property
    def k4(self):
        return 2.0 / self.mass

    @property
    def k8(self):
        return self.k4**2


def equation_coefficients(d):
    """(a, b) with a Lap Q - b Q + Q^3 = 0."""
    return d / 2.0, 2.0 - d / 2.0


def default_grid(d):
    N, P = _DEFAULT_GRID[d]
    return sg.TorusGrid(d, N, P)


def _residual_norm(grid, Q, a, b):
    Q_spec = grid.to_spectral(Q)
    lin = grid.to_physical((-a * grid.ksq - b) * Q_spec).real
    return fs.l2_norm_physical(grid, lin + Q**3)


def petviashvili(d, grid=None, tol=1e-10, max_iter=500, boundary_tol=1e-10):
    """Compute Q by the stabilized fixed-point iteration.

    Starts from a centered Gaussian; stops when the equation residual falls
    below ``tol``.  Raises NoConvergence if the residual stalls above ``tol``
    for 50 consecutive iterations, and BoundaryContamination when |Q| exceeds
    ``boundary_tol`` anywhere on the torus boundary (period too small).
    """
    if d not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    g = grid if grid is not None else default_grid(d)
    if g.d != d:
        raise DomainError(f"grid dimension {g.d} does not match d = {d}")
    a, b = equation_coefficients(d)
    inv_op = 1.0 / (b + a * g.ksq)

    center = g.P / 2.0
    r_sq = np.sum((g.x - center) ** 2, axis=0)
    Q = np.exp(-r_sq)

    residual = np.inf
    best = np.inf
    stall = 0
    S = np.nan
    for _ in range(max_iter):
        Q3 = Q**3
        lhs = g.to_physical((b + a * g.ksq) * g.to_spectral(Q)).real
        num = float(np.sum(lhs * Q))
        den = float(np.sum(Q3 * Q))
        if den <= 0:
            raise NoConvergence("iteration collapsed to a nonpositive profile")
        S = num / den
        Q = S**1.5 * g.to_physical(inv_op * g.to_spectral(Q3)).real
        residual = _residual_norm(g, Q, a, b)
        if residual < tol:
            break
        if residual >= best * (1.0 - 1e-3):
            stall += 1
            if stall >= 50:
                raise NoConvergence(
                    f"residual stalled at {residual:.3e} (tol {tol:.1e}) for 50 iterations"
                )
        else:
            stall = 0
        best = min(best, residual)
    else:
        raise NoConvergence(f"no convergence within {max_iter} iterations (residual {residual:.3e})")

    boundary = max(float(np.max(np.abs(np.take(Q, 0, axis=ax)))) for ax in range(d))
    if boundary > boundary_tol:
        raise BoundaryContamination(
            f"|Q| = {boundary:.3e} at the torus boundary; enlarge the period"
        )
    mass = fs.l2_norm_physical(g, Q) ** 2
    return GroundState(d=d, grid=g, Q=Q, mass=mass, residual=residual, tol=tol, stabilizer=S)


def best_constant(gs):
    """K^4(d) = 2 / ||Q||^2 (K^8 is exposed on the GroundState)."""
    if not gs.mass > 0:
        raise DomainError("ground state has zero mass")
    return 2.0 / gs.mass


# -- sharp interpolation inequality ------------------------------------------------


def sharp_ratio(grid, f, k4, d):
    """||f||_L4^4 / (K^4 ||f||_L2^{4-d} ||grad f||_L2^d) for one trial field."""
    phys = np.asarray(f)
    l2 = fs.l2_norm_physical(grid, phys)
    if l2 == 0:
        raise DomainError("trial field vanishes identically")
    l4 = fs.lp_norm_physical(grid, phys, 4.0)
    spec = grid.to_spectral(phys)
    grad = np.sqrt(float(np.sum(grid.ksq * np.abs(spec) ** 2)) * grid.volume / grid.modes**2)
    return l4**4 / (k4 * l2 ** (4 - d) * grad**d)


def sharp_inequality_check(gs, trials):
    """Max interpolation ratio over trial fields; the optimizer Q scores ~1."""
    return max(sharp_ratio(gs.grid, f, gs.k4, gs.d) for f in trials)


# -- radial shooting oracle -----------------------------------------------------------


def _radial_events():
    def crossing(r, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1

    def turning(r, y):
        # Q' crossing upward while Q > 0: the profile turns back toward the
        # constant equilibrium sqrt(b), so Q(0) was below the ground state.
        return y[1]

    turning.terminal = True
    turning.direction = 1
    return crossing, turning


def _shoot(d, eta, r_max, with_mass=False):
    """Integrate the radial equation from Q(0) = eta (series start at r0)."""
    a, b = equation_coefficients(d)

    def rhs(r, y):
        Q, dQ = y[0], y[1]
        out = [dQ, (b * Q - Q**3) / a - (d - 1) / r * dQ]
        if with_mass:
            out.append(Q * Q * r ** (d - 1))
        return out

    r0 = 1e-6
    c = (b * eta - eta**3) / (2.0 * a * d)
    y0 = [eta + c * r0**2, 2.0 * c * r0] + ([0.0] if with_mass else [])
    return solve_ivp(
        rhs,
        (r0, r_max),
        y0,
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        events=_radial_events(),
    )


def _classify_shot(d, eta, r_max):
    """+1 when Q turns back up (eta below the ground state), -1 when Q
    crosses zero (eta above), 0 when neither fires."""
    sol = _shoot(d, eta, r_max)
    if sol.t_events[0].size:
        return -1
    if sol.t_events[1].size:
        return +1
    return 0


_DEFAULT_BRACKET = {2: (1.3, 4.0), 3: (0.9, 4.0)}


def shooting_mass(d, r_max=45.0, bracket=None, iterations=200):
    """Independent oracle: bisection on Q(0) for the radial profile, then
    quadrature of the squared mass over R^d.

    Returns (mass, Q0).  d = 2 reproduces the critical mass of the cubic
    scalar field equation, ~ 11.70.  The bracket must straddle the ground
    state strictly above the constant equilibrium sqrt(2 - d/2).
    """
    if d not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    lo, hi = bracket if bracket is not None else _DEFAULT_BRACKET[d]
    if _classify_shot(d, lo, r_max) != +1 or _classify_shot(d, hi, r_max) != -1:
        raise DomainError(f"bracket ({lo}, {hi}) does not straddle the ground state")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _classify_shot(d, mid, r_max) >= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * hi:
            break
    eta = 0.5 * (lo + hi)

    # The bisected trajectory tracks Q down to ~1e-7 before the unstable mode
    # takes over and an event fires; the truncated tail is O(1e-12) in mass.
    sol = _shoot(d, eta, r_max, with_mass=True)
    surface = 2.0 * np.pi if d == 2 else 4.0 * np.pi
    return surface * float(sol.y[2, -1]), eta


# -- cache container -------------------------------------------------------------------


def write_groundstate(path, gs):
    """Cache a ground state in the binary snapshot container ("GS" record)."""
    header = struct.pack(
        fs._HEADER_FMT,
        fs.SNAPSHOT_MAGIC,
        _GS_RECORD,
        gs.d,
        gs.grid.N,
        gs.grid.P,
        gs.tol,
        gs.mass,
        gs.residual,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(gs.Q, dtype="<c16").tobytes())


def read_groundstate(path):
    record, d, N, P, (tol, mass, residual) = fs.read_snapshot_header(path)
    if record != _GS_RECORD:
        raise SnapshotVersionMismatch(f"expected ground-state record, found {record!r} in {path}")
    g = sg.TorusGrid(d, N, P)
    offset = struct.calcsize(fs._HEADER_FMT)
    with open(path, "rb") as fh:
        fh.seek(offset)
        Q = np.frombuffer(fh.read(16 * g.modes), dtype="<c16").reshape(g.shape).real.copy()
    return GroundState(d=d, grid=g, Q=Q, mass=mass, residual=residual, tol=tol, stabilizer=1.0)
