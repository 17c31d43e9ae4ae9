"""Field containers for (E, n, n_t, B, B_t), pointwise algebra, and Sobolev norms.

Every field is stored as a complex spectral array (raw ``fftn`` coefficients);
real-valued channels keep a Hermitian-symmetric spectrum and their reality is
monitored rather than silently assumed.  In two dimensions the paper's
embedding convention holds: E = (E1, E2, 0) and B = (0, 0, B3).
"""

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import grid as sg
from .errors import (
    DomainError,
    GridMismatch,
    ImaginaryResidue,
    SnapshotVersionMismatch,
)

SNAPSHOT_MAGIC = b"MZAK1"
_STATE_RECORD = b"ST"
_HEADER_FMT = "<5s2sBxxxIdddd"  # magic, record, d, pad, N, P, t0, t1, t2


@dataclass(frozen=True)
class Params:
    """Physical and scheme parameters: dispersion weight, smoothing, regularity."""

    alpha: float = 1.0
    epsilon: float = 0.0
    s: float = 2.0

    def __post_init__(self):
        if not self.alpha >= 1.0:
            raise DomainError(f"alpha must satisfy alpha >= 1, got {self.alpha}")
        if not (0.0 <= self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not self.s > 0:
            raise DomainError(f"regularity index s must be positive, got {self.s}")


@dataclass
class SystemState:
    """The quintuple (E, n, n_t, B, B_t) at one time instant, in spectral form.

    E is a complex 3-vector field; n, n_t real scalars; B, B_t real 3-vectors.
    n_t, B and B_t are zero-mean.  The state is a value: ``copy`` gives an
    independent deep copy and nothing here mutates shared arrays.
    """

    grid: sg.TorusGrid
    E: np.ndarray
    n: np.ndarray
    n_t: np.ndarray
    B: np.ndarray
    B_t: np.ndarray
    time: float = 0.0
    params: Params = field(default_factory=Params)

    def __post_init__(self):
        g = self.grid
        if self.params.s <= g.d / 2:
            raise DomainError(f"need s > d/2 = {g.d / 2}, got s = {self.params.s}")
        for name in ("E", "B", "B_t"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != (3,) + g.shape:
                raise GridMismatch(f"{name} must have shape (3,) + {g.shape}, got {arr.shape}")
            setattr(self, name, arr)
        for name in ("n", "n_t"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.shape != g.shape:
                raise GridMismatch(f"{name} must have shape {g.shape}, got {arr.shape}")
            setattr(self, name, arr)

    def copy(self):
        return replace(
            self,
            E=self.E.copy(),
            n=self.n.copy(),
            n_t=self.n_t.copy(),
            B=self.B.copy(),
            B_t=self.B_t.copy(),
        )

    def fields(self):
        """The five spectral arrays in canonical order."""
        return (self.E, self.n, self.n_t, self.B, self.B_t)

    # -- invariant monitors --------------------------------------------------

    def imag_residue(self):
        """Worst relative imaginary residue of the real channels n, n_t, B, B_t."""
        worst = 0.0
        for arr in (self.n, self.n_t, self.B, self.B_t):
            phys = self.grid.to_physical(arr)
            scale = max(np.max(np.abs(phys)), 1e-300)
            worst = max(worst, float(np.max(np.abs(phys.imag)) / scale))
        return worst

    def embedding_residue(self):
        """Max |coefficient| of the components pinned to zero in d = 2."""
        if self.grid.d == 3:
            return 0.0
        return float(
            max(
                np.max(np.abs(self.E[2])),
                np.max(np.abs(self.B[0])),
                np.max(np.abs(self.B[1])),
                np.max(np.abs(self.B_t[0])),
                np.max(np.abs(self.B_t[1])),
            )
        )

    def mean_residue(self):
        """Largest |k=0 coefficient| / modes among n_t, B, B_t (must stay ~0)."""
        zero = (Ellipsis,) + (0,) * self.grid.d
        vals = [np.max(np.abs(np.atleast_1d(arr[zero]))) for arr in (self.n_t, self.B, self.B_t)]
        return float(max(vals)) / self.grid.modes


def require_same_grid(grid, *specs):
    shape = grid.shape
    for spec in specs:
        arr = np.asarray(spec)
        if arr.shape[-grid.d:] != shape:
            raise GridMismatch(f"field of shape {arr.shape} does not live on {grid}")


# -- pointwise algebra -------------------------------------------------------


def cross_physical(u, v):
    """Pointwise cross product of two (3, ...) physical arrays."""
    return np.stack(
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    )


def cross(grid, u, v):
    """Pointwise u x v of two spectral 3-vector fields, dealiased."""
    require_same_grid(grid, u, v)
    if np.asarray(u).shape != np.asarray(v).shape:
        raise GridMismatch("cross product operands must have identical shapes")
    w = cross_physical(grid.to_physical(u), grid.to_physical(v))
    return sg.dealias(grid, grid.to_spectral(w))


def spin_density(grid, E, rtol=1e-12):
    """-i (E x conj(E)): the (real) spin density sourcing the magnetic field.

    E x conj(E) is purely imaginary pointwise, so the result is real up to
    roundoff; residues above ``rtol`` (relative to |E|_inf^2) signal upstream
    corruption and raise ImaginaryResidue.
    """
    require_same_grid(grid, E)
    Ep = grid.to_physical(E)
    w = -1j * cross_physical(Ep, np.conj(Ep))
    scale = max(float(np.max(np.abs(Ep))) ** 2, 1e-300)
    residue = float(np.max(np.abs(w.imag)))
    if residue > rtol * scale:
        raise ImaginaryResidue(
            f"spin density carries imaginary residue {residue:.3e} (scale {scale:.3e})"
        )
    return sg.dealias(grid, grid.to_spectral(w.real))


def intensity(grid, E):
    """|E|^2 = sum_j E_j conj(E_j), a real scalar field, dealiased."""
    require_same_grid(grid, E)
    Ep = grid.to_physical(E)
    return sg.dealias(grid, grid.to_spectral(np.sum(np.abs(Ep) ** 2, axis=0)))


# -- inner products and norms ------------------------------------------------


def inner(grid, f, g):
    """L2 inner product (f, g) = integral f conj(g), via Plancherel.

    Component axes (if any) are summed, i.e. vectors use the Euclidean dot.
    """
    return complex(np.sum(f * np.conj(g))) * grid.volume / grid.modes**2


def l2_norm_sq(grid, f):
    return float(np.sum(np.abs(f) ** 2)) * grid.volume / grid.modes**2


def l2_norm(grid, f):
    return np.sqrt(l2_norm_sq(grid, f))


def sobolev_norm(grid, f, s, flavor="inhomogeneous"):
    """Sobolev norm of a spectral field via Plancherel.

    flavor "inhomogeneous": ||(1+|k|^2)^{s/2} f_hat||;
    flavor "homogeneous":   |||k|^s f_hat|| (zero-mean required for s < 0).
    Component axes are summed in quadrature.
    """
    if flavor == "inhomogeneous":
        w = (1.0 + grid.ksq) ** (s / 2.0)
    elif flavor == "homogeneous":
        if s < 0:
            sg.check_zero_mean(grid, f, "homogeneous norm of order s < 0")
        w = sg.lambda_multiplier(grid, s, homogeneous=True).symbol
    else:
        raise DomainError(f"unknown norm flavor {flavor!r}")
    return np.sqrt(float(np.sum(w**2 * _abs_sq_summed(f, grid))) * grid.volume / grid.modes**2)


def intersection_norm(grid, f, s, neg_order):
    """max(H^s, Hdot^{neg_order}) realizing the intersection space H^s n Hdot^neg."""
    return max(
        sobolev_norm(grid, f, s, "inhomogeneous"),
        sobolev_norm(grid, f, neg_order, "homogeneous"),
    )


def _abs_sq_summed(f, grid):
    arr = np.abs(np.asarray(f)) ** 2
    lead = arr.ndim - grid.d
    if lead:
        arr = np.sum(arr, axis=tuple(range(lead)))
    return arr


def l2_norm_physical(grid, phys):
    """L2 norm by direct quadrature on the collocation grid."""
    return np.sqrt(float(np.sum(np.abs(phys) ** 2)) * grid.cell_volume)


def lp_norm_physical(grid, phys, p):
    """L^p norm by direct quadrature; p = inf gives the sup norm."""
    a = np.abs(phys)
    if np.isinf(p):
        return float(np.max(a))
    return float((np.sum(a**p) * grid.cell_volume) ** (1.0 / p))


# -- zero-mean projection ----------------------------------------------------


def project_zero_mean(grid, spec):
    """Zero the k=0 coefficient(s) of a spectral field."""
    out = np.array(spec, copy=True)
    out[(Ellipsis,) + (0,) * grid.d] = 0.0
    return out


def hermitian_project(grid, spec):
    """Project a spectral field onto Hermitian symmetry (real physical part)."""
    return grid.to_spectral(grid.to_physical(spec).real)


# -- binary snapshot container ------------------------------------------------

_FIELD_ORDER = ("E", "n", "n_t", "B", "B_t")


def write_state_snapshot(path, state):
    """Write the fixed-header binary snapshot (bit-exact round trip)."""
    g = state.grid
    header = struct.pack(
        _HEADER_FMT,
        SNAPSHOT_MAGIC,
        _STATE_RECORD,
        g.d,
        g.N,
        g.P,
        state.time,
        state.params.alpha,
        state.params.epsilon,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for name in _FIELD_ORDER:
            arr = np.ascontiguousarray(getattr(state, name), dtype="<c16")
            fh.write(arr.tobytes())


def read_snapshot_header(path):
    with open(path, "rb") as fh:
        raw = fh.read(struct.calcsize(_HEADER_FMT))
    magic, record, d, N, P, t0, t1, t2 = struct.unpack(_HEADER_FMT, raw)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotVersionMismatch(f"bad magic {magic!r} in {path}")
    return record, d, N, P, (t0, t1, t2)


def read_state_snapshot(path, s=None):
    """Read a state snapshot; ``s`` overrides the regularity index (not stored)."""
    record, d, N, P, (time, alpha, epsilon) = read_snapshot_header(path)
    if record != _STATE_RECORD:
        raise SnapshotVersionMismatch(f"expected state record, found {record!r} in {path}")
    g = sg.TorusGrid(d, N, P)
    count = g.modes
    offset = struct.calcsize(_HEADER_FMT)
    arrays = {}
    with open(path, "rb") as fh:
        fh.seek(offset)
        for name in _FIELD_ORDER:
            ncomp = 3 if name in ("E", "B", "B_t") else 1
            data = np.frombuffer(fh.read(16 * ncomp * count), dtype="<c16")
            shape = ((3,) + g.shape) if ncomp == 3 else g.shape
            arrays[name] = data.reshape(shape).copy()
    params = Params(alpha=alpha, epsilon=epsilon, s=(s if s is not None else d / 2 + 0.5))
    return SystemState(grid=g, time=time, params=params, **arrays)


def zero_state(grid, params=None, time=0.0):
    """A state with all five fields identically zero."""
    params = params if params is not None else Params(s=grid.d / 2 + 0.5)
    z = lambda: np.zeros(grid.shape, dtype=complex)
    zv = lambda: np.zeros((3,) + grid.shape, dtype=complex)
    return SystemState(grid=grid, E=zv(), n=z(), n_t=z(), B=zv(), B_t=zv(), time=time, params=params)
