"""Time advancement of the regularized system.

Two interchangeable schemes:

* a Strang splitting alternating the exact linear flows (Schroedinger group,
  free wave, free plate) with an RK4 substep for the smoothed nonlinear
  E-coupling, plus Simpson quadrature of the n_t / B_t sources;
* a Picard fixed-point iteration on the Duhamel integral map over short
  windows, mirroring the contraction construction: given an E-history on
  quadrature nodes, the n and B histories are rebuilt from their
  variation-of-constants formulas and the E-history is updated through the
  unitary group.

Both support the low/high frequency "modified" mode, where the density and
magnetic channels carry the drift-corrected fields and the printed
time-dependent sources.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fields as fs
from . import grid as sg
from . import propagators as pr
from .diagnostics import record_from_state, total_norm
from .errors import (
    BlowUp,
    DomainError,
    GridMismatch,
    MaxIterExceeded,
    NonContraction,
    NonFinite,
)

_SCHEMES = ("strang", "picard")


@dataclass
class LowFrequencyData:
    """Smooth low-frequency parts (n_1L, B_0L, B_1L) of the initial data.

    Spectra must be supported in |k| <= 2 (the plateau radius of the cutoff).
    """

    n_1L: np.ndarray
    B_0L: np.ndarray
    B_1L: np.ndarray

    def validate(self, grid):
        outside = grid.kabs > 2.0
        for name, arr in (("n_1L", self.n_1L), ("B_0L", self.B_0L), ("B_1L", self.B_1L)):
            arr = np.asarray(arr)
            if arr.shape[-grid.d:] != grid.shape:
                raise GridMismatch(f"{name} does not live on {grid}")
            scale = max(float(np.max(np.abs(arr))), 1e-300)
            leak = float(np.max(np.abs(arr) * outside))
            if leak > 1e-12 * scale:
                raise DomainError(f"{name} has spectral content outside |k| <= 2 ({leak:.3e})")
        return self

    def is_zero(self):
        return not (np.any(self.n_1L) or np.any(self.B_0L) or np.any(self.B_1L))

    @classmethod
    def zero(cls, grid):
        z = np.zeros(grid.shape, dtype=complex)
        zv = np.zeros((3,) + grid.shape, dtype=complex)
        return cls(n_1L=z, B_0L=zv, B_1L=zv.copy())


@dataclass
class IntegratorConfig:
    """Scheme selection and stepping controls."""

    scheme: str = "strang"
    dt: float = 1e-3
    t_end: float = 1.0
    t_win: float = 0.05
    tol_fp: float = 1e-10
    max_iter: int = 60
    modified_mode: bool = False
    diag_interval: float = 0.1
    snapshot_interval: float = 0.0
    blowup_threshold: float = 1e6
    window_halvings: int = 8

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise DomainError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if not self.tol_fp > 0:
            raise DomainError(f"tol_fp must be positive, got {self.tol_fp}")
        if self.t_win < self.dt:
            raise DomainError(f"t_win ({self.t_win}) must be at least dt ({self.dt})")
        if self.t_end < 0:
            raise DomainError(f"t_end must be nonnegative, got {self.t_end}")


# -- right-hand sides -----------------------------------------------------------


def _smoothed_projector(grid, params):
    """Combined symbol: dealias then smooth (both diagonal, they commute)."""
    return grid.dealias_mask / (1.0 + params.epsilon**2 * grid.ksq**2)


def _spin_physical(Ep):
    """-i (E x conj E) with the (roundoff) imaginary residue projected out."""
    return (-1j * fs.cross_physical(Ep, np.conj(Ep))).real


def rhs_regularized(state):
    """Time derivative (E_t, n_t, n_tt, B_t, B_tt) of the smoothed system.

    E_t = -i L A E - i L(n E) - L(E x B);  n and B follow their wave and plate
    equations with the dealiased sources Delta |E|^2 and Delta^2 spin(E).
    """
    g = state.grid
    params = state.params
    sg.check_finite(state.E, "rhs input E")
    LP = _smoothed_projector(g, params)

    Ep = g.to_physical(state.E)
    n_phys = g.to_physical(state.n).real
    B_phys = g.to_physical(state.B).real

    AE = sg.dispersion_operator(g, state.E, params.alpha)
    nE = g.to_spectral(n_phys * Ep)
    ExB = g.to_spectral(fs.cross_physical(Ep, B_phys))
    # the linear part is not dealiased (A is diagonal); products are
    L = 1.0 / (1.0 + params.epsilon**2 * g.ksq**2)
    dE = -1j * L * AE - 1j * LP * nE - LP * ExB

    dn = state.n_t.copy()
    intensity = g.to_spectral(np.sum(np.abs(Ep) ** 2, axis=0))
    dn_t = -g.ksq * state.n - g.ksq * (g.dealias_mask * intensity)

    dB = state.B_t.copy()
    spin = g.to_spectral(_spin_physical(Ep))
    dB_t = -g.ksq**2 * state.B - g.ksq * state.B + g.ksq**2 * (g.dealias_mask * spin)
    return dE, dn, dn_t, dB, dB_t


def rhs_modified(state, lfd):
    """Derivative tuple of the drift-corrected system.

    The E-equation sees the reconstructed coefficients (n~ + t n_1L) and
    (B~ + B_0L + t B_1L); the n~ and B~ channels carry the printed explicit
    time-dependent sources.  With zero low-frequency data this coincides with
    ``rhs_regularized``.
    """
    g = state.grid
    params = state.params
    t = state.time
    sg.check_finite(state.E, "rhs input E")
    L = 1.0 / (1.0 + params.epsilon**2 * g.ksq**2)
    LP = _smoothed_projector(g, params)

    Ep = g.to_physical(state.E)
    n_eff = g.to_physical(state.n + t * lfd.n_1L).real
    B_eff = g.to_physical(state.B + lfd.B_0L + t * lfd.B_1L).real

    AE = sg.dispersion_operator(g, state.E, params.alpha)
    nE = g.to_spectral(n_eff * Ep)
    ExB = g.to_spectral(fs.cross_physical(Ep, B_eff))
    dE = -1j * L * AE - 1j * LP * nE - LP * ExB

    dn = state.n_t.copy()
    intensity = g.to_spectral(np.sum(np.abs(Ep) ** 2, axis=0))
    dn_t = -g.ksq * state.n - g.ksq * (g.dealias_mask * intensity) - t * g.ksq * lfd.n_1L

    dB = state.B_t.copy()
    spin = g.to_spectral(_spin_physical(Ep))
    low = lfd.B_0L + t * lfd.B_1L
    dB_t = (
        -g.ksq**2 * state.B
        - g.ksq * state.B
        + g.ksq**2 * (g.dealias_mask * spin)
        - g.ksq**2 * low
        - g.ksq * low
    )
    return dE, dn, dn_t, dB, dB_t


# -- modified-system change of variables ------------------------------------------


def to_modified(state, lfd, t=None):
    """Subtract the low-frequency drifts: n~ = n - t n_1L, B~ = B - B_0L - t B_1L
    (and correspondingly n~_t = n_t - n_1L, B~_t = B_t - B_1L)."""
    lfd.validate(state.grid)
    t = state.time if t is None else t
    return replace(
        state.copy(),
        n=state.n - t * lfd.n_1L,
        n_t=state.n_t - lfd.n_1L,
        B=state.B - lfd.B_0L - t * lfd.B_1L,
        B_t=state.B_t - lfd.B_1L,
    )


def from_modified(state, lfd, t=None):
    """Inverse of ``to_modified``; the round trip is exact."""
    lfd.validate(state.grid)
    t = state.time if t is None else t
    return replace(
        state.copy(),
        n=state.n + t * lfd.n_1L,
        n_t=state.n_t + lfd.n_1L,
        B=state.B + lfd.B_0L + t * lfd.B_1L,
        B_t=state.B_t + lfd.B_1L,
    )


# -- Strang splitting ---------------------------------------------------------------


class _StrangWorkspace:
    """Multipliers cached for one (grid, params, dt, lfd) stepping context."""

    def __init__(self, grid, params, dt, lfd=None):
        self.grid = grid
        self.params = params
        self.dt = dt
        self.lfd = lfd
        half = dt / 2.0
        self.phase_l, self.phase_t = pr.schrodinger_phases(grid, half, params)
        w = pr.wave_dispersion(grid)
        self.wave_half = pr._rotation_symbols(w, half)
        om = pr.plate_dispersion(grid)
        self.plate_half = pr._rotation_symbols(om, half)
        self.LP = _smoothed_projector(grid, params)
        self.mask = grid.dealias_mask
        self.minus_ksq = -grid.ksq
        self.ksq_sq = grid.ksq**2
        if lfd is not None and not lfd.is_zero():
            self.n1L_phys = grid.to_physical(lfd.n_1L).real
            self.B0L_phys = grid.to_physical(lfd.B_0L).real
            self.B1L_phys = grid.to_physical(lfd.B_1L).real
            self.src_n_low = self.minus_ksq * lfd.n_1L
            low0 = -self.ksq_sq * lfd.B_0L + self.minus_ksq * lfd.B_0L
            low1 = -self.ksq_sq * lfd.B_1L + self.minus_ksq * lfd.B_1L
            self.src_B_low0, self.src_B_low1 = low0, low1
        else:
            self.n1L_phys = None

    # one exact half-step of every linear flow
    def half_linear(self, st):
        st.E = pr.apply_split_phases(self.grid, st.E, self.phase_l, self.phase_t)
        c, s_over, mws = self.wave_half
        st.n, st.n_t = c * st.n + s_over * st.n_t, mws * st.n + c * st.n_t
        c, s_over, mws = self.plate_half
        st.B, st.B_t = c * st.B + s_over * st.B_t, mws * st.B + c * st.B_t
        return st

    def _coefficients(self, n_phys, B_phys, t):
        if self.n1L_phys is None:
            return n_phys, B_phys
        return n_phys + t * self.n1L_phys, B_phys + self.B0L_phys + t * self.B1L_phys

    def nonlinear_rate(self, E_spec, n_phys, B_phys):
        g = self.grid
        Ep = g.to_physical(E_spec)
        nE = g.to_spectral(n_phys * Ep)
        ExB = g.to_spectral(fs.cross_physical(Ep, B_phys))
        return -1j * self.LP * nE - self.LP * ExB, Ep

    def source_n(self, Ep, t):
        g = self.grid
        out = self.minus_ksq * (self.mask * g.to_spectral(np.sum(np.abs(Ep) ** 2, axis=0)))
        if self.n1L_phys is not None:
            out = out + t * self.src_n_low
        return out

    def source_B(self, Ep, t):
        g = self.grid
        out = self.ksq_sq * (self.mask * g.to_spectral(_spin_physical(Ep)))
        if self.n1L_phys is not None:
            out = out + self.src_B_low0 + t * self.src_B_low1
        return out

    def nonlinear_full(self, st):
        """RK4 for the frozen-coefficient E-coupling over [t, t+dt], plus Simpson
        quadrature of the n_t / B_t sources at the substep's three nodes."""
        g = self.grid
        dt = self.dt
        t0 = st.time
        n_phys0 = g.to_physical(st.n).real
        B_phys0 = g.to_physical(st.B).real

        def G(E, tau):
            n_c, B_c = self._coefficients(n_phys0, B_phys0, tau)
            rate, Ep = self.nonlinear_rate(E, n_c, B_c)
            return rate, Ep

        g1, Ep0 = G(st.E, t0)
        g2, _ = G(st.E + 0.5 * dt * g1, t0 + 0.5 * dt)
        g3, _ = G(st.E + 0.5 * dt * g2, t0 + 0.5 * dt)
        g4, _ = G(st.E + dt * g3, t0 + dt)
        E_new = st.E + (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
        E_mid = st.E + 0.25 * dt * (g1 + g2)

        Ep_mid = g.to_physical(E_mid)
        Ep_new = g.to_physical(E_new)
        w = dt / 6.0
        st.n_t = st.n_t + w * (
            self.source_n(Ep0, t0)
            + 4.0 * self.source_n(Ep_mid, t0 + 0.5 * dt)
            + self.source_n(Ep_new, t0 + dt)
        )
        st.B_t = st.B_t + w * (
            self.source_B(Ep0, t0)
            + 4.0 * self.source_B(Ep_mid, t0 + 0.5 * dt)
            + self.source_B(Ep_new, t0 + dt)
        )
        st.E = E_new
        return st

    def step(self, st):
        st = self.half_linear(st)
        st = self.nonlinear_full(st)
        st = self.half_linear(st)
        st.time += self.dt
        return st


def strang_step(state, dt, lfd=None):
    """One Strang step: exact half linear flows around an RK4 nonlinear substep.

    Global order 2 in dt.  ``lfd`` switches on the modified-system sources.
    """
    ws = _StrangWorkspace(state.grid, state.params, dt, lfd)
    return ws.step(state.copy())


# -- Picard fixed-point windows ---------------------------------------------------------


def _interp_midpoints(values):
    """Quadratic midpoint interpolation on a uniform node sequence.

    Returns per-interval midpoints: interval i (between nodes i and i+1) uses
    the stencil (i, i+1, i+2) with weights (3, 6, -1)/8, except the last
    interval, which uses (i-1, i, i+1) with weights (-1, 6, 3)/8.
    """
    M = len(values) - 1
    mids = []
    for i in range(M):
        if i + 2 <= M:
            mids.append(0.375 * values[i] + 0.75 * values[i + 1] - 0.125 * values[i + 2])
        else:
            mids.append(-0.125 * values[i - 1] + 0.75 * values[i] + 0.375 * values[i + 1])
    return mids


def picard_window(state, t_win, tol_fp=1e-10, max_iter=60, dt=None, lfd=None, stats=None):
    """Advance one window by fixed-point iteration on the Duhamel map.

    Nodes are spaced at half the nominal step.  Each sweep rebuilds the n and
    B histories from the current E-history through the wave/plate Duhamel
    steps, then updates the E-history through the unitary group with Simpson
    quadrature.  Stops when successive E-histories differ by less than
    ``tol_fp`` in the sup-over-nodes H^1 norm.

    Raises NonContraction when the successive-difference ratio stays >= 1 for
    three consecutive sweeps (the caller should halve the window), and
    MaxIterExceeded past ``max_iter`` sweeps.  ``stats``, when given,
    receives the sweep count and the final difference.
    """
    g = state.grid
    params = state.params
    if dt is None:
        dt = t_win / 4.0
    m = max(1, math.ceil(t_win / dt - 1e-12))
    M = 2 * m
    h = t_win / M
    times = state.time + h * np.arange(M + 1)

    modified = lfd is not None and not lfd.is_zero()
    if lfd is not None:
        lfd.validate(g)

    L = 1.0 / (1.0 + params.epsilon**2 * g.ksq**2)
    LP = g.dealias_mask * L
    mask = g.dealias_mask
    phase_l_h, phase_t_h = pr.schrodinger_phases(g, h, params)
    phase_l_hh, phase_t_hh = pr.schrodinger_phases(g, h / 2.0, params)

    def U_h(E):
        return pr.apply_split_phases(g, E, phase_l_h, phase_t_h)

    def U_hh(E):
        return pr.apply_split_phases(g, E, phase_l_hh, phase_t_hh)

    # forcing of the n / B channels at a node
    def forcings(E, t):
        Ep = g.to_physical(E)
        Fn = -g.ksq * (mask * g.to_spectral(np.sum(np.abs(Ep) ** 2, axis=0)))
        FB = g.ksq**2 * (mask * g.to_spectral(_spin_physical(Ep)))
        if modified:
            Fn = Fn - t * g.ksq * lfd.n_1L
            low = lfd.B_0L + t * lfd.B_1L
            FB = FB - g.ksq**2 * low - g.ksq * low
        return Fn, FB

    def reconstruct(E_hist):
        Fn_hist, FB_hist = zip(*(forcings(E, t) for E, t in zip(E_hist, times)))
        Fn_mid = _interp_midpoints(list(Fn_hist))
        FB_mid = _interp_midpoints(list(FB_hist))
        n_hist, nt_hist = [state.n], [state.n_t]
        B_hist, Bt_hist = [state.B], [state.B_t]
        for i in range(M):
            n_i, nt_i = pr.duhamel_wave(
                g, n_hist[-1], nt_hist[-1], (Fn_hist[i], Fn_mid[i], Fn_hist[i + 1]), h
            )
            n_hist.append(n_i)
            nt_hist.append(nt_i)
            B_i, Bt_i = pr.duhamel_plate(
                g, B_hist[-1], Bt_hist[-1], (FB_hist[i], FB_mid[i], FB_hist[i + 1]), h
            )
            B_hist.append(B_i)
            Bt_hist.append(Bt_i)
        return n_hist, nt_hist, B_hist, Bt_hist

    def coupling(E, n_spec, B_spec, t):
        Ep = g.to_physical(E)
        n_phys = g.to_physical(n_spec).real
        B_phys = g.to_physical(B_spec).real
        if modified:
            n_phys = n_phys + t * g.to_physical(lfd.n_1L).real
            B_phys = B_phys + g.to_physical(lfd.B_0L + t * lfd.B_1L).real
        nE = g.to_spectral(n_phys * Ep)
        ExB = g.to_spectral(fs.cross_physical(Ep, B_phys))
        return -1j * LP * nE - LP * ExB

    # initial guess: free flight
    E_hist = [state.E]
    for _ in range(M):
        E_hist.append(U_h(E_hist[-1]))

    prev_delta = None
    stall = 0
    converged = False
    sweeps = 0
    for _ in range(max_iter):
        sweeps += 1
        n_hist, nt_hist, B_hist, Bt_hist = reconstruct(E_hist)
        f_hist = [coupling(E, n_s, B_s, t) for E, n_s, B_s, t in zip(E_hist, n_hist, B_hist, times)]
        f_mid = _interp_midpoints(f_hist)
        E_new = [state.E]
        for i in range(M):
            quad = (h / 6.0) * (U_h(f_hist[i]) + 4.0 * U_hh(f_mid[i]) + f_hist[i + 1])
            E_new.append(U_h(E_new[-1]) + quad)
        delta = max(
            fs.sobolev_norm(g, En - Eo, 1.0) for En, Eo in zip(E_new[1:], E_hist[1:])
        ) if M else 0.0
        E_hist = E_new
        if delta < tol_fp:
            converged = True
            break
        if prev_delta is not None and delta >= prev_delta:
            stall += 1
            if stall >= 3:
                raise NonContraction(
                    f"fixed-point iteration stopped contracting (delta = {delta:.3e})"
                )
        else:
            stall = 0
        prev_delta = delta
    if not converged:
        raise MaxIterExceeded(f"no fixed point within {max_iter} sweeps (delta = {delta:.3e})")
    if stats is not None:
        stats["sweeps"] = sweeps
        stats["delta"] = delta

    n_hist, nt_hist, B_hist, Bt_hist = reconstruct(E_hist)
    out = state.copy()
    out.E = E_hist[-1]
    out.n, out.n_t = n_hist[-1], nt_hist[-1]
    out.B, out.B_t = B_hist[-1], Bt_hist[-1]
    out.time = float(times[-1])
    return out


# -- run driver --------------------------------------------------------------------------


@dataclass
class RunResult:
    state: object
    records: list = field(default_factory=list)


def _check_state_finite(state):
    for name, arr in zip(("E", "n", "n_t", "B", "B_t"), state.fields()):
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"field {name} became non-finite at t = {state.time}")


def run(state, config, lfd=None, on_record=None, on_snapshot=None):
    """Advance to t_end, emitting diagnostics every ``diag_interval``.

    Returns the final state and the collected records.  On a blow-up or a
    non-finite field the diagnostics collected so far are flushed through
    ``on_record`` before the error propagates.  In picard mode a
    NonContraction triggers automatic window halving, up to
    ``config.window_halvings`` times, before failing hard.
    """
    if config.modified_mode and lfd is None:
        raise DomainError("modified_mode requires low-frequency data")
    use_lfd = lfd if config.modified_mode else None
    st = state.copy()
    _check_state_finite(st)

    ref = record_from_state(st)
    records = [ref]
    if on_record:
        on_record(ref, st)
    if on_snapshot and config.snapshot_interval > 0:
        on_snapshot(st)

    t0 = st.time
    t_end = config.t_end
    horizon = t0 + t_end
    eps_t = 1e-9 * max(1.0, abs(horizon))
    next_diag = t0 + config.diag_interval if config.diag_interval > 0 else math.inf
    next_snap = t0 + config.snapshot_interval if config.snapshot_interval > 0 else math.inf

    ws_cache = {}

    def strang_ws(dt):
        key = round(dt, 15)
        if key not in ws_cache:
            ws_cache[key] = _StrangWorkspace(st.grid, st.params, dt, use_lfd)
        return ws_cache[key]

    win = config.t_win
    steps = 0
    while st.time < horizon - eps_t:
        if config.scheme == "strang":
            dt_step = min(config.dt, horizon - st.time)
            st = strang_ws(dt_step).step(st)
            steps += 1
            if abs(dt_step - config.dt) < 1e-15 * max(1.0, config.dt):
                st.time = t0 + steps * config.dt  # avoid accumulation drift
        else:
            dt_step = min(win, horizon - st.time)
            halvings = 0
            while True:
                try:
                    st_next = picard_window(
                        st, dt_step, config.tol_fp, config.max_iter, dt=config.dt, lfd=use_lfd
                    )
                    break
                except NonContraction:
                    halvings += 1
                    if halvings > config.window_halvings:
                        raise
                    dt_step /= 2.0
                    win = dt_step  # keep the contracting window size
            st = st_next
        _check_state_finite(st)

        while st.time >= next_diag - eps_t:
            rec = record_from_state(st, ref)
            if rec.time > records[-1].time + eps_t:
                records.append(rec)
                if on_record:
                    on_record(rec, st)
            next_diag += config.diag_interval
        if on_snapshot and st.time >= next_snap - eps_t:
            on_snapshot(st)
            while next_snap <= st.time + eps_t:
                next_snap += config.snapshot_interval

        if records and total_norm(st) > config.blowup_threshold:
            rec = record_from_state(st, ref)
            if rec.time > records[-1].time + eps_t:
                records.append(rec)
                if on_record:
                    on_record(rec, st)
            raise BlowUp(f"solution norm exceeded {config.blowup_threshold:.1e} at t = {st.time}")

    if st.time > records[-1].time + eps_t:
        rec = record_from_state(st, ref)
        records.append(rec)
        if on_record:
            on_record(rec, st)
    return RunResult(state=st, records=records)
