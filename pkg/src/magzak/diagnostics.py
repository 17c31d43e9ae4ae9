"""Conserved quantities, Sobolev-norm tables, smallness thresholds, and
closed-form bootstrap / blow-up envelope utilities.

The two invariants are the mass-type functional (L2 mass of E plus the
regularization's fourth-order correction) and the energy-type functional
combining the E-dispersion energies, the wave and plate energies of the n and
B channels, and two cubic couplings.  Both are evaluated with the same
discrete operations the dynamics uses, so their drift measures time-stepping
error only.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fields as fs
from . import grid as sg
from .errors import DomainError, NonFinite


# -- conserved functionals ----------------------------------------------------


def phi(state):
    """Mass-type invariant ||E||_L2^2 + eps^2 ||Lap E||_L2^2 (eps from state)."""
    g = state.grid
    eps = state.params.epsilon
    value = fs.l2_norm_sq(g, state.E)
    if eps != 0.0:
        value += eps**2 * fs.l2_norm_sq(g, g.ksq * state.E)
    return value


def psi(state):
    """Energy-type invariant: seven quadratic terms plus two cubic couplings.

    The cubic integrals are evaluated in physical space on the dealiased grid,
    which is the discretely consistent counterpart of how the dynamics
    evaluates the same products.  Requires zero-mean n_t, B, B_t.
    """
    g = state.grid
    alpha = state.params.alpha
    E, n, n_t, B, B_t = state.fields()

    quad = fs.l2_norm_sq(g, sg.divergence(g, E))
    quad += alpha * fs.l2_norm_sq(g, sg.curl(g, E))
    quad += 0.5 * fs.l2_norm_sq(g, n)
    quad += 0.5 * fs.l2_norm_sq(g, sg.apply_lambda(g, n_t, -1.0))
    quad += 0.5 * fs.l2_norm_sq(g, sg.apply_lambda(g, B_t, -2.0))
    quad += 0.5 * fs.l2_norm_sq(g, B)
    quad += 0.5 * fs.l2_norm_sq(g, sg.apply_lambda(g, B, -1.0))

    Ep = g.to_physical(E)
    np_ = g.to_physical(n).real
    Bp = g.to_physical(B).real
    intensity = np.sum(np.abs(Ep) ** 2, axis=0)
    cubic_n = float(np.sum(np_ * intensity)) * g.cell_volume
    spin_cross = fs.cross_physical(Ep, np.conj(Ep))  # purely imaginary pointwise
    cubic_b = float(np.real(1j * np.sum(spin_cross * Bp))) * g.cell_volume
    return quad + cubic_n + cubic_b


def identity_check_grad_split(grid, E):
    """|  ||div E||^2 + ||curl E||^2 - ||grad E||^2  |, exact in spectral space."""
    div_sq = fs.l2_norm_sq(grid, sg.divergence(grid, E))
    curl_sq = fs.l2_norm_sq(grid, sg.curl(grid, E))
    grad_sq = float(np.sum(grid.ksq * np.sum(np.abs(E) ** 2, axis=0)))
    grad_sq *= grid.volume / grid.modes**2
    return abs(div_sq + curl_sq - grad_sq)


# -- bootstrap and blow-up envelope --------------------------------------------


def bootstrap_root(a, b, kappa, tol=1e-13):
    """Continuation test for f <= a + b f^kappa.

    Returns a dict with ``condition`` (whether a^{kappa-1} b falls strictly
    below (kappa-1)^{kappa-1}/kappa^kappa, which traps f below the smaller
    fixed point) and, when the condition holds, ``x1``, the smaller positive
    root of a + b x^kappa = x found by bisection on [a, x0] with
    x0 = (1/(b kappa))^{1/(kappa-1)}.
    """
    if not (a > 0 and b > 0 and kappa > 1):
        raise DomainError(f"need a, b > 0 and kappa > 1, got a={a}, b={b}, kappa={kappa}")
    condition = a ** (kappa - 1.0) * b < (kappa - 1.0) ** (kappa - 1.0) / kappa**kappa
    if not condition:
        return {"condition": False}
    x0 = (1.0 / (b * kappa)) ** (1.0 / (kappa - 1.0))
    g = lambda x: a + b * x**kappa - x
    lo, hi = a, x0  # g(lo) = b a^kappa > 0, g(hi) < 0 under the condition
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
    return {"condition": True, "x1": 0.5 * (lo + hi)}


@dataclass(frozen=True)
class GronwallEnvelope:
    """Closed-form super-solution of u <= A1 + A2 int u^kappa with its blow-up time.

    v(0) = A1, v is strictly increasing on [0, T_star) and diverges at T_star.
    """

    A1: float
    A2: float
    kappa: float
    T_star: float

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.T_star):
            raise DomainError(f"envelope defined on [0, T*), T* = {self.T_star}")
        k1 = self.kappa - 1.0
        return self.A1 / (1.0 - k1 * self.A1**k1 * self.A2 * t) ** (1.0 / k1)

    __call__ = envelope

    def check_trajectory(self, ts, us, rtol=1e-10):
        """True when the sampled trajectory stays below the envelope up to rtol."""
        ts = np.asarray(ts, dtype=float)
        us = np.asarray(us, dtype=float)
        v = self.envelope(ts)
        excess = np.max((us - v) / np.maximum(np.abs(v), 1e-300))
        return bool(excess <= rtol), float(excess)


def gronwall_envelope(A1, A2, kappa):
    """Blow-up envelope for u <= A1 + A2 int_0^t u^kappa."""
    if not (A1 > 0 and A2 > 0 and kappa > 1):
        raise DomainError(f"need A1, A2 > 0 and kappa > 1, got A1={A1}, A2={A2}, kappa={kappa}")
    T_star = 1.0 / ((kappa - 1.0) * A1 ** (kappa - 1.0) * A2)
    return GronwallEnvelope(A1=A1, A2=A2, kappa=kappa, T_star=T_star)


# -- smallness thresholds -------------------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    """Evaluation of the global-existence smallness conditions on the data.

    ``margin`` is the ratio LHS/RHS of the binding inequality (the L2-mass
    condition); the condition passes iff margin < 1.  For d = 3 the second
    requirement (gradient mass below |psi0|) is reported separately in
    ``condition_3d_pair``.  ``psi0_sign`` surfaces the sign of the energy
    functional at t=0, which enters only through its absolute value.
    """

    d: int
    E0_mass: float
    E0_grad_sq: float
    Q_mass: float
    K4: float
    psi0_abs: float
    psi0_sign: int
    condition_2d: bool | None
    condition_3d_pair: tuple[bool, bool] | None
    margin: float

    @property
    def K8(self):
        return self.K4**2

    @property
    def passed(self):
        if self.d == 2:
            return bool(self.condition_2d)
        return bool(self.condition_3d_pair[0] and self.condition_3d_pair[1])

    def to_dict(self):
        return {
            "d": self.d,
            "E0_mass": self.E0_mass,
            "E0_grad_sq": self.E0_grad_sq,
            "Q_mass": self.Q_mass,
            "K4": self.K4,
            "K8": self.K8,
            "psi0_abs": self.psi0_abs,
            "psi0_sign": self.psi0_sign,
            "condition_2d": self.condition_2d,
            "condition_3d_pair": list(self.condition_3d_pair) if self.condition_3d_pair else None,
            "margin": self.margin,
            "passed": self.passed,
        }


def threshold_report(grid, E0, psi0, Q_mass):
    """Check the dimension-dependent smallness conditions on (E0, psi0).

    d = 2: twice the L2 mass of E0 must fall strictly below the ground-state
    mass.  d = 3: the L2 mass must fall strictly below 1/(27 K^8 |psi0|) and
    the gradient mass must not exceed |psi0|; K^4 = 2 / Q_mass.
    """
    if not Q_mass > 0:
        raise DomainError(f"ground-state mass must be positive, got {Q_mass}")
    d = grid.d
    E0_mass = fs.l2_norm_sq(grid, E0)
    E0_grad_sq = float(np.sum(grid.ksq * np.sum(np.abs(E0) ** 2, axis=0)))
    E0_grad_sq *= grid.volume / grid.modes**2
    K4 = 2.0 / Q_mass
    psi0_abs = abs(psi0)
    psi0_sign = int(np.sign(psi0))
    if d == 2:
        lhs, rhs = 2.0 * E0_mass, Q_mass
        return ThresholdReport(
            d=2,
            E0_mass=E0_mass,
            E0_grad_sq=E0_grad_sq,
            Q_mass=Q_mass,
            K4=K4,
            psi0_abs=psi0_abs,
            psi0_sign=psi0_sign,
            condition_2d=bool(lhs < rhs),
            condition_3d_pair=None,
            margin=lhs / rhs,
        )
    if psi0 == 0:
        raise DomainError("the d = 3 threshold is undefined for psi0 = 0")
    rhs = 1.0 / (27.0 * K4**2 * psi0_abs)
    return ThresholdReport(
        d=3,
        E0_mass=E0_mass,
        E0_grad_sq=E0_grad_sq,
        Q_mass=Q_mass,
        K4=K4,
        psi0_abs=psi0_abs,
        psi0_sign=psi0_sign,
        condition_2d=None,
        condition_3d_pair=(bool(E0_mass < rhs), bool(E0_grad_sq <= psi0_abs)),
        margin=E0_mass / rhs,
    )


# -- time-stamped records --------------------------------------------------------


@dataclass
class DiagnosticsRecord:
    """Time-stamped invariant values, norm table, and drifts relative to t=0."""

    time: float
    phi: float
    psi: float
    norms: dict = field(default_factory=dict)
    drift_phi: float = 0.0
    drift_psi: float = 0.0

    def to_json(self):
        payload = {
            "t": self.time,
            "phi": self.phi,
            "psi": self.psi,
            "drift_phi": self.drift_phi,
            "drift_psi": self.drift_psi,
            "norms": self.norms,
        }
        return json.dumps(payload, ensure_ascii=False)

    @classmethod
    def from_json(cls, line):
        obj = json.loads(line)
        return cls(
            time=obj["t"],
            phi=obj["phi"],
            psi=obj["psi"],
            norms=obj.get("norms", {}),
            drift_phi=obj.get("drift_phi", 0.0),
            drift_psi=obj.get("drift_psi", 0.0),
        )


def _drift(value, ref):
    return abs(value - ref) / max(abs(ref), 1e-30)


def norm_table(state):
    """The solution-class norms tracked along a trajectory."""
    g = state.grid
    s = state.params.s
    return {
        "E:H^{s+1}": fs.sobolev_norm(g, state.E, s + 1.0),
        "n:H^{s}": fs.sobolev_norm(g, state.n, s),
        "n_t:H^{s-1}∩Ḣ^{-1}": fs.intersection_norm(g, state.n_t, s - 1.0, -1.0),
        "B:H^{s}∩Ḣ^{-1}": fs.intersection_norm(g, state.B, s, -1.0),
        "B_t:H^{s-2}∩Ḣ^{-2}": fs.intersection_norm(g, state.B_t, s - 2.0, -2.0),
    }


def total_norm(state):
    """Sum of the tracked norms; the blow-up detector watches this quantity."""
    return float(sum(norm_table(state).values()))


def record_from_state(state, reference=None):
    """Build a DiagnosticsRecord; raises NonFinite if any entry is not finite."""
    rec = DiagnosticsRecord(time=state.time, phi=phi(state), psi=psi(state), norms=norm_table(state))
    if reference is not None:
        rec.drift_phi = _drift(rec.phi, reference.phi)
        rec.drift_psi = _drift(rec.psi, reference.psi)
    values = [rec.time, rec.phi, rec.psi, rec.drift_phi, rec.drift_psi, *rec.norms.values()]
    if not all(math.isfinite(v) for v in values):
        raise NonFinite(f"diagnostics at t = {state.time} contain non-finite entries")
    return rec


def write_ndjson(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_ndjson(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [DiagnosticsRecord.from_json(line) for line in fh if line.strip()]
