"""Batch studies turning the analytical estimates into falsifiable numerics.

* smoothing-limit study: runs the integrator across a geometric ladder of
  smoothing strengths and tabulates pairwise sup-in-time differences (the
  Cauchy-sequence property) together with their contraction ratios;
* fractional Leibniz / commutator ratio sampling (empirical constants,
  reported rather than asserted);
* trilinear cancellation checks, including the exact discrete identity
  J13 + J22 = 0;
* low/high frequency splitting with a compactly supported radial cutoff.
"""

import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fields as fs
from . import grid as sg
from . import integrate as it
from .errors import DomainError, ExponentMismatch


# -- frequency splitting -------------------------------------------------------


def cutoff_profile(rho):
    """Radial cutoff: 1 for rho <= 1, 0 for rho >= 2, smoothstep in between."""
    rho = np.asarray(rho, dtype=float)
    t = np.clip(rho - 1.0, 0.0, 1.0)
    return 1.0 - 3.0 * t**2 + 2.0 * t**3


def lowpass_symbol(grid):
    """The cutoff evaluated on the wavenumber lattice, phi(|k|)."""
    return cutoff_profile(grid.kabs)


def frequency_split(grid, f):
    """Exact partition f = f_L + f_H with f_L = phi(|k|) f and f_H = f - f_L.

    The low part is supported in |k| <= 2 and the high part vanishes on
    |k| <= 1.
    """
    fL = lowpass_symbol(grid) * f
    return fL, f - fL


def split_initial_data(state):
    """Split (n_t, B, B_t) at t = 0 into the drift-corrected initial data and
    the low-frequency drift fields.

    Returns (modified_state, low_frequency_data): the modified state carries
    (n, n_1H, B_0H, B_1H), all of which sit in the negative-order classes.
    """
    if state.time != 0.0:
        raise DomainError("initial-data splitting is defined at t = 0")
    g = state.grid
    n1L, n1H = frequency_split(g, state.n_t)
    B0L, B0H = frequency_split(g, state.B)
    B1L, B1H = frequency_split(g, state.B_t)
    lfd = it.LowFrequencyData(n_1L=n1L, B_0L=B0L, B_1L=B1L).validate(g)
    mod = state.copy()
    mod.n_t, mod.B, mod.B_t = n1H, B0H, B1H
    return mod, lfd


# -- random band-limited fields --------------------------------------------------


def band_modes(P, d, kcut):
    """Integer mode vectors with |k| <= kcut (physical units), enumerated in a
    grid-independent (lexicographic) order, so identical seeds give identical
    fields on refined grids."""
    L = int(np.floor(kcut * P / (2.0 * np.pi) + 1e-9))
    scale = 2.0 * np.pi / P
    modes = []
    for m in itertools.product(range(-L, L + 1), repeat=d):
        if scale * np.sqrt(sum(c * c for c in m)) <= kcut + 1e-12:
            modes.append(m)
    return modes


class BandSampler:
    """Draws band-limited fields with complex Gaussian spectra decaying like
    (1 + |k|)^{-decay}.  The draw order is grid-independent."""

    def __init__(self, grid, kcut, decay, zero_mean=False):
        self.grid = grid
        self.kcut = kcut
        self.decay = decay
        modes = band_modes(grid.P, grid.d, kcut)
        if zero_mean:
            modes = [m for m in modes if any(m)]
        self.count = len(modes)
        scale = 2.0 * np.pi / grid.P
        kabs = np.array([scale * np.sqrt(sum(c * c for c in m)) for m in modes])
        self.amplitude = (1.0 + kabs) ** (-decay)
        self.index = tuple(np.array([m[ax] % grid.N for m in modes]) for ax in range(grid.d))

    def scalar(self, rng, real=False):
        z = rng.standard_normal((self.count, 2))
        out = np.zeros(self.grid.shape, dtype=complex)
        # physical-amplitude convention: f(x) = sum amp_m z_m exp(i k_m x),
        # so the same draw is the same function on any refinement
        out[self.index] = self.grid.modes * self.amplitude * (z[:, 0] + 1j * z[:, 1])
        if real:
            out = fs.hermitian_project(self.grid, out)
        return out

    def vector(self, rng, real=False):
        return np.stack([self.scalar(rng, real=real) for _ in range(3)])


def random_band_limited(grid, rng, decay, kcut, vector=False, real=False, zero_mean=False):
    """One random band-limited spectral field (see BandSampler)."""
    sampler = BandSampler(grid, kcut, decay, zero_mean=zero_mean)
    return sampler.vector(rng, real=real) if vector else sampler.scalar(rng, real=real)


def _default_kcut(grid):
    # keeps pairwise products fully resolved: |k| <= N/4 per factor
    return (grid.N / 4.0) * (2.0 * np.pi / grid.P)


# -- smoothing-limit (Cauchy) study -------------------------------------------------


@dataclass
class PairDifference:
    """Sup-in-time differences between two ladder entries."""

    eps_a: float
    eps_b: float
    dE_H1: float
    dn_L2: float
    dB_L2_Hm1: float
    combined: float
    dEt_Hm1: float
    dnt_Hm1: float
    dBt_Hm2: float
    deriv_combined: float


@dataclass
class ConvergenceTable:
    """Pairwise differences along the smoothing ladder and their contraction."""

    ladder: list
    sample_times: list
    pairs: list
    ratios: list = field(default_factory=list)
    deriv_ratios: list = field(default_factory=list)

    def __post_init__(self):
        for p in self.pairs:
            for v in (p.dE_H1, p.dn_L2, p.dB_L2_Hm1, p.combined, p.deriv_combined):
                if not (np.isfinite(v) and v >= 0):
                    raise DomainError(f"non-finite or negative table entry {v!r}")

    def to_csv(self):
        buf = io.StringIO()
        buf.write("eps_a,eps_b,dE_H1,dn_L2,dB_L2_Hm1,combined,dEt_Hm1,dnt_Hm1,dBt_Hm2,deriv_combined\n")
        for p in self.pairs:
            buf.write(
                f"{p.eps_a},{p.eps_b},{p.dE_H1},{p.dn_L2},{p.dB_L2_Hm1},{p.combined},"
                f"{p.dEt_Hm1},{p.dnt_Hm1},{p.dBt_Hm2},{p.deriv_combined}\n"
            )
        return buf.getvalue()

    def summary(self):
        return {
            "ladder": list(self.ladder),
            "combined": [p.combined for p in self.pairs],
            "deriv_combined": [p.deriv_combined for p in self.pairs],
            "ratios": list(self.ratios),
            "deriv_ratios": list(self.deriv_ratios),
        }


def _sample_run(state, eps, T, config):
    """Run one ladder entry; collect (E, n, B, E_t, n_t, B_t) at sample times."""
    st = state.copy()
    st.params = replace(st.params, epsilon=eps)
    cfg = replace(config, t_end=T, snapshot_interval=0.0)
    samples = []

    def grab(_rec, s):
        dE = it.rhs_regularized(s)[0]
        samples.append((s.time, s.E.copy(), s.n.copy(), s.B.copy(), dE, s.n_t.copy(), s.B_t.copy()))

    it.run(st, cfg, on_record=grab)
    return samples


def epsilon_convergence_study(state, ladder, T, config, workers=1):
    """Run the integrator once per smoothing strength on identical data and
    tabulate the pairwise sup-in-time differences of consecutive entries.

    The difference metric combines ||dE||_H1 + ||dn||_L2 + ||dB||_{L2 n Hdot^-1};
    the derivative metric combines ||dE_t||_{H^-1} + ||dn_t||_{Hdot^-1} +
    ||dB_t||_{Hdot^-2}.  Contraction ratios compare consecutive pairs.
    """
    ladder = list(ladder)
    if len(ladder) < 2:
        raise DomainError("the smoothing ladder needs at least two entries")
    g = state.grid
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(lambda e: _sample_run(state, e, T, config), ladder))
    else:
        runs = [_sample_run(state, e, T, config) for e in ladder]

    times = [s[0] for s in runs[0]]
    pairs = []
    for (ea, run_a), (eb, run_b) in zip(zip(ladder, runs), zip(ladder[1:], runs[1:])):
        dE = dn = dB = 0.0
        dEt = dnt = dBt = 0.0
        for sa, sb in zip(run_a, run_b):
            dE = max(dE, fs.sobolev_norm(g, sa[1] - sb[1], 1.0))
            dn = max(dn, fs.l2_norm(g, sa[2] - sb[2]))
            dB = max(dB, fs.intersection_norm(g, sa[3] - sb[3], 0.0, -1.0))
            dEt = max(dEt, fs.sobolev_norm(g, sa[4] - sb[4], -1.0))
            dnt = max(dnt, fs.sobolev_norm(g, sa[5] - sb[5], -1.0, "homogeneous"))
            dBt = max(dBt, fs.sobolev_norm(g, sa[6] - sb[6], -2.0, "homogeneous"))
        pairs.append(
            PairDifference(
                eps_a=ea,
                eps_b=eb,
                dE_H1=dE,
                dn_L2=dn,
                dB_L2_Hm1=dB,
                combined=dE + dn + dB,
                dEt_Hm1=dEt,
                dnt_Hm1=dnt,
                dBt_Hm2=dBt,
                deriv_combined=dEt + dnt + dBt,
            )
        )
    ratios = [
        a.combined / b.combined if b.combined > 0 else np.inf
        for a, b in zip(pairs, pairs[1:])
    ]
    deriv_ratios = [
        a.deriv_combined / b.deriv_combined if b.deriv_combined > 0 else np.inf
        for a, b in zip(pairs, pairs[1:])
    ]
    return ConvergenceTable(
        ladder=ladder, sample_times=times, pairs=pairs, ratios=ratios, deriv_ratios=deriv_ratios
    )


# -- fractional Leibniz / commutator ratios ----------------------------------------


def _check_exponents(exponents):
    p, p1, p2, p3, p4 = exponents
    for name, q in (("p", p), ("p2", p2), ("p3", p3)):
        if not (1.0 < q < np.inf):
            raise ExponentMismatch(f"{name} must lie in (1, inf), got {q}")
    for name, q in (("p1", p1), ("p4", p4)):
        if not (1.0 < q):
            raise ExponentMismatch(f"{name} must exceed 1, got {q}")
    inv = lambda q: 0.0 if np.isinf(q) else 1.0 / q
    if abs(inv(p) - inv(p1) - inv(p2)) > 1e-12 or abs(inv(p) - inv(p3) - inv(p4)) > 1e-12:
        raise ExponentMismatch(f"Hoelder scaling 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4 fails for {exponents}")
    return p, p1, p2, p3, p4


def _lp(grid, spec, q):
    """L^q norm (by grid quadrature) of a spectral field; vector magnitudes
    are taken pointwise."""
    phys = grid.to_physical(spec)
    if phys.ndim > grid.d:
        mag = np.sqrt(np.sum(np.abs(phys) ** 2, axis=0))
    else:
        mag = np.abs(phys)
    return fs.lp_norm_physical(grid, mag, q)


def kato_ponce_ratio(grid, s, exponents, n_samples, seed=0, kcut=None, decay=None, collect=False):
    """Empirical ratio LHS/RHS for the fractional product rule and its
    commutator variant, maximized over random band-limited pairs.

    The spectra decay like (1+|k|)^{-(s+2)} and sit inside |k| <= kcut, so
    every pairwise product is fully resolved and the ratios measure analysis
    rather than aliasing.  Returns maxima and medians for both inequalities;
    with ``collect`` the per-sample norm components are kept as rows.
    """
    if s <= 0:
        raise DomainError(f"need s > 0, got {s}")
    p, p1, p2, p3, p4 = _check_exponents(exponents)
    kcut = kcut if kcut is not None else _default_kcut(grid)
    decay = decay if decay is not None else s + 2.0
    sampler = BandSampler(grid, kcut, decay, zero_mean=True)
    rng = np.random.default_rng(seed)

    lam_s = sg.lambda_multiplier(grid, s).symbol
    lam_sm1 = sg.lambda_multiplier(grid, s - 1.0).symbol  # zero-mean draws keep s < 1 safe

    prod_ratios = np.empty(n_samples)
    comm_ratios = np.empty(n_samples)
    rows = []
    for i in range(n_samples):
        f = sampler.scalar(rng)
        g_ = sampler.scalar(rng)
        fp = grid.to_physical(f)
        gp = grid.to_physical(g_)
        fg = grid.to_spectral(fp * gp)

        lhs = _lp(grid, lam_s * fg, p)
        f_p1 = _lp(grid, f, p1)
        g_s_p2 = _lp(grid, lam_s * g_, p2)
        f_s_p3 = _lp(grid, lam_s * f, p3)
        g_p4 = _lp(grid, g_, p4)
        rhs = f_p1 * g_s_p2 + f_s_p3 * g_p4
        prod_ratios[i] = lhs / rhs

        lam_g_phys = grid.to_physical(lam_s * g_)
        comm = lam_s * fg - grid.to_spectral(fp * lam_g_phys)
        comm_lhs = _lp(grid, comm, p)
        gradf_p1 = _lp(grid, sg.gradient(grid, f), p1)
        g_sm1_p2 = _lp(grid, lam_sm1 * g_, p2)
        comm_rhs = gradf_p1 * g_sm1_p2 + f_s_p3 * g_p4
        comm_ratios[i] = comm_lhs / comm_rhs
        if collect:
            rows.append(
                {
                    "sample": i,
                    "product_lhs": lhs,
                    "f_Lp1": f_p1,
                    "g_Hs_p2": g_s_p2,
                    "f_Hs_p3": f_s_p3,
                    "g_Lp4": g_p4,
                    "product_ratio": float(prod_ratios[i]),
                    "commutator_lhs": comm_lhs,
                    "gradf_Lp1": gradf_p1,
                    "g_Hsm1_p2": g_sm1_p2,
                    "commutator_ratio": float(comm_ratios[i]),
                }
            )

    out = {
        "product_max": float(np.max(prod_ratios)),
        "product_median": float(np.median(prod_ratios)),
        "commutator_max": float(np.max(comm_ratios)),
        "commutator_median": float(np.median(comm_ratios)),
        "samples": int(n_samples),
        "seed": int(seed),
        "grid": repr(grid),
        "kcut": float(kcut),
        "s": float(s),
    }
    if collect:
        out["rows"] = rows
    return out


def rows_to_csv(rows):
    """Render per-sample study rows (a list of uniform dicts) as CSV text."""
    if not rows:
        return ""
    keys = list(rows[0])
    buf = io.StringIO()
    buf.write(",".join(keys) + "\n")
    for row in rows:
        buf.write(",".join(str(row[k]) for k in keys) + "\n")
    return buf.getvalue()


# -- trilinear cancellation ----------------------------------------------------------


def trilinear_cancellation(grid, s, n_samples, seed=0, kcut=None, decay=None, collect=False):
    """Sample the trilinear form J = J1 + J2 and its proof-level decomposition.

    J1 pairs the smoothed product (f h) against g at order s+1; J2 pairs
    (conj(f) . Lap-order-2 g) against h at order s.  The terms J13 and J22
    cancel exactly in the discrete inner product (conjugate pairing with a
    real h), so max |J13 + J22| sits at roundoff; the normalized |J| stays
    O(1).  Also evaluates the cross-product variant.
    """
    if s <= grid.d / 2:
        raise DomainError(f"need s > d/2 = {grid.d / 2}, got {s}")
    kcut = kcut if kcut is not None else _default_kcut(grid)
    decay = decay if decay is not None else s + 2.0
    sampler = BandSampler(grid, kcut, decay, zero_mean=True)
    rng = np.random.default_rng(seed)

    lam_sp1 = sg.lambda_multiplier(grid, s + 1.0).symbol
    lam_sp2 = sg.lambda_multiplier(grid, s + 2.0).symbol
    lam_s = sg.lambda_multiplier(grid, s).symbol
    lam_2 = grid.ksq  # Lambda^2 == |k|^2

    w = grid.volume / grid.modes  # quadrature weight per collocation point

    max_J = 0.0
    max_cancel = 0.0
    max_cross = 0.0
    rows = []
    for sample in range(n_samples):
        f = sampler.vector(rng)
        g_ = sampler.vector(rng)
        h = sampler.scalar(rng, real=True)
        ht = sampler.vector(rng, real=True)

        fp = grid.to_physical(f)
        hp = grid.to_physical(h).real
        l2g_phys = grid.to_physical(lam_2 * g_)
        lam_sp1_g = lam_sp1 * g_
        lam_sp2_g_phys = grid.to_physical(lam_sp2 * g_)
        lam_s_h_phys = grid.to_physical(lam_s * h).real

        fh = grid.to_spectral(fp * hp)
        J1 = float(np.imag(fs.inner(grid, lam_sp1 * fh, lam_sp1_g)))
        w2 = grid.to_spectral(np.einsum("j...,j...->...", np.conj(fp), l2g_phys))
        J2 = float(np.imag(fs.inner(grid, lam_s * w2, lam_s * h)))
        J = J1 + J2

        norm = (
            fs.sobolev_norm(grid, f, s + 1.0)
            * fs.sobolev_norm(grid, g_, s + 1.0)
            * fs.sobolev_norm(grid, h, s)
        )
        max_J = max(max_J, abs(J) / norm)

        J13 = float(
            np.imag(np.sum(np.einsum("j...,j...->...", fp, np.conj(lam_sp2_g_phys)) * lam_s_h_phys))
            * w
        )
        J22 = float(
            np.imag(np.sum(np.einsum("j...,j...->...", np.conj(fp), lam_sp2_g_phys) * lam_s_h_phys))
            * w
        )
        max_cancel = max(max_cancel, abs(J13 + J22))

        htp = grid.to_physical(ht).real
        fxh = grid.to_spectral(fs.cross_physical(fp, htp))
        J1x = float(np.real(fs.inner(grid, lam_sp1 * fxh, lam_sp1_g)))
        w2x = grid.to_spectral(fs.cross_physical(np.conj(fp), l2g_phys))
        J2x = float(np.real(fs.inner(grid, lam_s * w2x, lam_s * ht)))
        norm_x = (
            fs.sobolev_norm(grid, f, s + 1.0)
            * fs.sobolev_norm(grid, g_, s + 1.0)
            * fs.sobolev_norm(grid, ht, s)
        )
        max_cross = max(max_cross, abs(J1x - J2x) / norm_x)
        if collect:
            rows.append(
                {
                    "sample": sample,
                    "J1": J1,
                    "J2": J2,
                    "J_normalized": abs(J) / norm,
                    "J13": J13,
                    "J22": J22,
                    "J13_plus_J22": J13 + J22,
                    "cross_normalized": abs(J1x - J2x) / norm_x,
                }
            )

    out = {
        "max_J_normalized": max_J,
        "max_J13_plus_J22": max_cancel,
        "max_cross_normalized": max_cross,
        "samples": int(n_samples),
        "seed": int(seed),
        "s": float(s),
    }
    if collect:
        out["rows"] = rows
    return out


def study_summary_json(result):
    return json.dumps(result, ensure_ascii=False, indent=2, default=float)
