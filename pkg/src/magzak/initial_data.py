"""Built-in initial-data generators.

Every generator returns a valid SystemState: fields dealiased, means of
(n_t, B, B_t) projected out, reality of the scalar/magnetic channels exact,
and the planar embedding applied in two dimensions.  Identical (spec, grid,
seed) triples reproduce bit-identical states.
"""

import numpy as np

from . import fields as fs
from . import grid as sg
from .errors import DomainError, UnknownGenerator
from .studies import BandSampler

GENERATORS = ("gaussian-packet", "single-mode", "random-smooth", "snapshot")


def _finalize(state):
    g = state.grid
    state.E = sg.dealias(g, state.E)
    state.n = sg.dealias(g, state.n)
    state.n_t = fs.project_zero_mean(g, sg.dealias(g, state.n_t))
    state.B = fs.project_zero_mean(g, sg.dealias(g, state.B))
    state.B_t = fs.project_zero_mean(g, sg.dealias(g, state.B_t))
    if g.d == 2:
        state.E[2] = 0.0
        state.B[0] = state.B[1] = 0.0
        state.B_t[0] = state.B_t[1] = 0.0
    return state


def _gaussian_envelope(grid, width, center=None):
    c = grid.P / 2.0 if center is None else center
    r_sq = np.sum((grid.x - c) ** 2, axis=0)
    return np.exp(-r_sq / (2.0 * width**2))


def gaussian_packet(grid, params, e_norm=0.1, width=None, carrier=1.0, n_amp=0.0,
                    n1_amp=0.0, b_amp=0.0, b1_amp=0.0):
    """Modulated Gaussian envelope for E (transverse polarization, carrier
    along the first axis, L2 norm rescaled to ``e_norm`` exactly), plus
    optional Gaussian bumps in the other channels."""
    width = grid.P / 10.0 if width is None else width
    state = fs.zero_state(grid, params)
    envelope = _gaussian_envelope(grid, width) * np.exp(1j * carrier * grid.x[0])
    E_spec = sg.dealias(grid, grid.to_spectral(envelope))
    norm = fs.l2_norm(grid, E_spec)
    if norm == 0:
        raise DomainError("gaussian packet collapsed to zero on this grid")
    state.E[1] = (e_norm / norm) * E_spec

    bump = _gaussian_envelope(grid, width)
    bump_spec = grid.to_spectral(bump)
    if n_amp:
        state.n = n_amp * bump_spec
    if n1_amp:
        state.n_t = n1_amp * bump_spec
    if b_amp:
        state.B[2] = b_amp * bump_spec
    if b1_amp:
        state.B_t[2] = b1_amp * bump_spec
    return _finalize(state)


def single_mode(grid, params, k_index=(1, 0), amplitude=0.1, orientation="transverse"):
    """One Fourier mode in E: amp * exp(i k . x) with the requested polarization.

    ``orientation`` is "transverse" (perpendicular to k, in-plane),
    "longitudinal" (along k), or a component index 0..2.
    """
    k_index = tuple(int(v) for v in k_index)
    if len(k_index) != grid.d:
        raise DomainError(f"k_index must have {grid.d} entries, got {k_index}")
    state = fs.zero_state(grid, params)
    kvec = np.zeros(3)
    kvec[: grid.d] = np.array(k_index) * (2.0 * np.pi / grid.P)
    mode = np.exp(1j * np.tensordot(kvec[: grid.d], grid.x, axes=1))
    if orientation == "longitudinal":
        knorm = np.linalg.norm(kvec)
        if knorm == 0:
            raise DomainError("longitudinal polarization undefined at k = 0")
        pol = kvec / knorm
    elif orientation == "transverse":
        pol = np.array([-kvec[1], kvec[0], 0.0])
        if np.linalg.norm(pol) == 0:  # k along the third axis
            pol = np.array([1.0, 0.0, 0.0])
        else:
            pol /= np.linalg.norm(pol)
    else:
        pol = np.zeros(3)
        pol[int(orientation)] = 1.0
    for j in range(3):
        if pol[j]:
            state.E[j] = amplitude * pol[j] * grid.to_spectral(mode)
    return _finalize(state)


def random_smooth(grid, params, seed=0, decay=4.0, kcut=2.0, e_amp=0.1, n_amp=0.0,
                  n1_amp=0.0, b_amp=0.0, b1_amp=0.0):
    """Random fields with polynomially decaying spectra below a fixed physical
    cutoff.  Draw order is grid-independent, so refining N reproduces the
    same band-limited fields."""
    rng = np.random.default_rng(seed)
    sampler = BandSampler(grid, kcut, decay)
    sampler0 = BandSampler(grid, kcut, decay, zero_mean=True)
    state = fs.zero_state(grid, params)
    state.E = e_amp * sampler.vector(rng)
    if grid.d == 2:
        state.E[2] = 0.0
    state.n = n_amp * sampler.scalar(rng, real=True) if n_amp else state.n
    state.n_t = n1_amp * sampler0.scalar(rng, real=True) if n1_amp else state.n_t
    if b_amp or b1_amp:
        if grid.d == 2:
            if b_amp:
                state.B[2] = b_amp * sampler0.scalar(rng, real=True)
            if b1_amp:
                state.B_t[2] = b1_amp * sampler0.scalar(rng, real=True)
        else:
            if b_amp:
                state.B = b_amp * sampler0.vector(rng, real=True)
            if b1_amp:
                state.B_t = b1_amp * sampler0.vector(rng, real=True)
    return _finalize(state)


def generate_initial_data(spec, grid, seed=0, params=None):
    """Dispatch on the named generator in ``spec`` (a dict with key "generator").

    Remaining keys are generator parameters; "snapshot" expects "path".
    """
    params = params if params is not None else fs.Params(s=grid.d / 2 + 0.5)
    opts = dict(spec)
    name = opts.pop("generator", None)
    if name == "gaussian-packet":
        return gaussian_packet(grid, params, **opts)
    if name == "single-mode":
        return single_mode(grid, params, **opts)
    if name == "random-smooth":
        opts.setdefault("seed", seed)
        return random_smooth(grid, params, **opts)
    if name == "snapshot":
        state = fs.read_state_snapshot(opts["path"], s=params.s)
        if not state.grid.same_as(grid):
            raise DomainError(f"snapshot grid {state.grid} does not match requested {grid}")
        state.params = params
        return state
    raise UnknownGenerator(f"unknown initial-data generator {name!r} (choose from {GENERATORS})")
