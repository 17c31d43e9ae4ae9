"""Periodic torus grid, discrete Fourier transforms, and Fourier-multiplier operators.

All operator functions in this module act on *spectral* arrays, i.e. the raw
output of ``numpy.fft.fftn`` over the trailing ``d`` axes.  Scalar fields have
shape ``grid.shape``; 3-vector fields have shape ``(3,) + grid.shape`` (the
third component is kept, and identically zero, when ``d == 2``).
"""

import numpy as np

from .errors import DomainError, NonFinite, NonZeroMean

# Relative tolerance for the zero-mean precondition of negative-order multipliers.
ZERO_MEAN_RTOL = 1e-12


def _is_power_of_two(n):
    return n >= 2 and (n & (n - 1)) == 0


class TorusGrid:
    """Periodic computational domain [0, P)^d with the standard FFT mode layout.

    Precomputes the wavenumber lattice k in (2*pi/P)*Z^d (symmetric index
    range, Nyquist row included once), |k|, |k|^2, the 2/3-rule dealias mask,
    and the collocation coordinates.  Instances are immutable and safe to
    share across threads.
    """

    def __init__(self, d, N, P=16.0 * np.pi):
        if d not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {d}")
        if not _is_power_of_two(int(N)):
            raise DomainError(f"points-per-axis must be a power of two >= 2, got {N}")
        if not (P > 0):
            raise DomainError(f"period length must be positive, got {P}")
        self.d = int(d)
        self.N = int(N)
        self.P = float(P)
        self.shape = (self.N,) * self.d

        idx1 = np.fft.fftfreq(self.N) * self.N  # integer mode indices
        index_axes = np.meshgrid(*([idx1] * self.d), indexing="ij")
        self.mode_index = np.stack(index_axes)              # (d,) + shape
        self.k = (2.0 * np.pi / self.P) * self.mode_index   # physical wavenumbers

        k3 = np.zeros((3,) + self.shape)
        k3[: self.d] = self.k
        self.k3 = k3

        self.ksq = np.sum(self.k * self.k, axis=0)
        self.kabs = np.sqrt(self.ksq)

        # 2/3 rule: zero every mode with any |k_j| > (2/3) * k_max.  For N a
        # power of two the cut N/3 is never an integer, so the rule is
        # unambiguous, and the Nyquist row (index N/2) always falls outside.
        cut = (2.0 / 3.0) * (self.N // 2)
        self.dealias_mask = np.all(np.abs(self.mode_index) <= cut, axis=0)

        x1 = self.P * np.arange(self.N) / self.N
        self.x = np.stack(np.meshgrid(*([x1] * self.d), indexing="ij"))

        self.cell_volume = (self.P / self.N) ** self.d
        self.volume = self.P ** self.d
        self.modes = self.N ** self.d

    # -- transforms ---------------------------------------------------------

    @property
    def _axes(self):
        return tuple(range(-self.d, 0))

    def to_spectral(self, phys):
        """Forward transform over the trailing d axes."""
        return np.fft.fftn(phys, axes=self._axes)

    def to_physical(self, spec):
        """Inverse transform over the trailing d axes (complex output)."""
        return np.fft.ifftn(spec, axes=self._axes)

    # -- helpers ------------------------------------------------------------

    def same_as(self, other):
        return (
            isinstance(other, TorusGrid)
            and other.d == self.d
            and other.N == self.N
            and other.P == self.P
        )

    def __repr__(self):
        return f"TorusGrid(d={self.d}, N={self.N}, P={self.P:g})"


class MultiplierSpec:
    """A scalar or 3x3-matrix-valued Fourier symbol applied mode-wise.

    ``kind`` is "scalar" (symbol shape == grid.shape) or "matrix3" (symbol
    shape == (3, 3) + grid.shape).  ``zero_mode_policy`` records how the k=0
    entry was filled: "value" (natural evaluation), "zero" (singular symbol,
    only valid on zero-mean fields), or "limit" (removable singularity).
    """

    def __init__(self, kind, symbol, zero_mode_policy="value"):
        if kind not in ("scalar", "matrix3"):
            raise DomainError(f"unknown multiplier kind {kind!r}")
        if zero_mode_policy not in ("value", "zero", "limit"):
            raise DomainError(f"unknown zero-mode policy {zero_mode_policy!r}")
        self.kind = kind
        self.symbol = np.asarray(symbol)
        self.zero_mode_policy = zero_mode_policy

    def apply(self, spec):
        if self.kind == "scalar":
            return self.symbol * spec
        # matrix3: contract the leading component axis mode-wise
        return np.einsum("ij...,j...->i...", self.symbol, spec)

    def is_hermitian(self, tol=1e-14):
        if self.kind == "scalar":
            return bool(np.max(np.abs(np.imag(self.symbol))) <= tol)
        swapped = np.conj(np.swapaxes(self.symbol, 0, 1))
        return bool(np.max(np.abs(self.symbol - swapped)) <= tol)


# -- multiplier builders ----------------------------------------------------


def lambda_multiplier(grid, s, homogeneous=True):
    """Symbol of Lambda^s: |k|^s (homogeneous) or (1+|k|^2)^{s/2}.

    The homogeneous symbol takes the value 0 at k=0 for s > 0 (natural
    limit), 1 for s = 0 (identity), and 0 by fiat for s < 0, where the
    operator is only defined on zero-mean fields.
    """
    if not homogeneous:
        return MultiplierSpec("scalar", (1.0 + grid.ksq) ** (s / 2.0))
    if s == 0:
        return MultiplierSpec("scalar", np.ones(grid.shape))
    if s > 0:
        return MultiplierSpec("scalar", grid.kabs ** s)
    sym = np.zeros(grid.shape)
    nonzero = grid.ksq > 0
    sym[nonzero] = grid.kabs[nonzero] ** s
    return MultiplierSpec("scalar", sym, zero_mode_policy="zero")


def smoother_multiplier(grid, epsilon):
    """Symbol 1/(1 + eps^2 |k|^4) of the fourth-order regularizing smoother."""
    if not (0.0 <= epsilon < 1.0):
        raise DomainError(f"smoother strength must lie in [0, 1), got {epsilon}")
    return MultiplierSpec("scalar", 1.0 / (1.0 + epsilon**2 * grid.ksq**2))


def dispersion_matrix(grid, alpha):
    """3x3 Hermitian symbol (1-alpha) k k^T + alpha |k|^2 I of the operator
    E -> -grad(div E) + alpha curl(curl E)."""
    sym = np.einsum("i...,j...->ij...", grid.k3, grid.k3) * (1.0 - alpha)
    for j in range(3):
        sym[j, j] += alpha * grid.ksq
    return MultiplierSpec("matrix3", sym)


# -- checked operator entry points -----------------------------------------


def check_finite(field, where="field"):
    if not np.all(np.isfinite(field)):
        raise NonFinite(f"{where} contains non-finite coefficients")


def check_zero_mean(grid, spec, where="field", rtol=ZERO_MEAN_RTOL):
    """Require the k=0 coefficient(s) to vanish relative to the field size.

    Works for scalar fields (shape == grid.shape) and fields with leading
    component axes; the check is applied per component against the spectral
    l2 size of that component.
    """
    arr = np.asarray(spec)
    zero_idx = (Ellipsis,) + (0,) * grid.d
    means = np.atleast_1d(np.abs(arr[zero_idx]))
    sizes = np.atleast_1d(np.sqrt(np.sum(np.abs(arr) ** 2, axis=tuple(range(-grid.d, 0)))))
    worst = np.max(means - rtol * np.maximum(sizes, 1e-300))
    if worst > 0:
        raise NonZeroMean(f"{where} must have zero mean (|k=0 coefficient| = {np.max(means):.3e})")


def apply_lambda(grid, spec, s, homogeneous=True):
    """Apply Lambda^s (|k|^s) or the inhomogeneous (1+|k|^2)^{s/2} mode-wise.

    For s < 0 homogeneous, the input must have zero mean; the k=0 output is 0.
    """
    check_finite(spec, "apply_lambda input")
    if homogeneous and s < 0:
        check_zero_mean(grid, spec, "apply_lambda input (s < 0)")
    return lambda_multiplier(grid, s, homogeneous).apply(spec)


def grad_div(grid, E):
    """grad(div E): mode-wise -k (k . E_hat)."""
    check_finite(E, "grad_div input")
    kdotE = np.einsum("j...,j...->...", grid.k3, E)
    return -grid.k3 * kdotE


def curl_curl(grid, E):
    """curl(curl E): mode-wise |k|^2 E_hat - k (k . E_hat)."""
    check_finite(E, "curl_curl input")
    kdotE = np.einsum("j...,j...->...", grid.k3, E)
    return grid.ksq * E - grid.k3 * kdotE


def dispersion_operator(grid, E, alpha):
    """-grad(div E) + alpha curl(curl E), the self-adjoint E-dispersion."""
    return -grad_div(grid, E) + alpha * curl_curl(grid, E)


def apply_smoother(grid, spec, epsilon):
    """Scale each mode by 1/(1 + eps^2 |k|^4)."""
    check_finite(spec, "apply_smoother input")
    return smoother_multiplier(grid, epsilon).apply(spec)


def dealias(grid, spec):
    """Zero all modes outside the 2/3 ball.  Idempotent."""
    return grid.dealias_mask * spec


def laplacian(grid, spec):
    """Laplacian: mode-wise -|k|^2."""
    return -grid.ksq * spec


def gradient(grid, spec):
    """Gradient of a scalar field: i k f_hat, returned as a d-vector."""
    return 1j * grid.k * spec


def curl(grid, E):
    """curl E = i k x E_hat for a 3-vector field."""
    k = grid.k3
    return 1j * np.stack(
        [
            k[1] * E[2] - k[2] * E[1],
            k[2] * E[0] - k[0] * E[2],
            k[0] * E[1] - k[1] * E[0],
        ]
    )


def divergence(grid, E):
    """div E = i k . E_hat."""
    return 1j * np.einsum("j...,j...->...", grid.k3, E)
