"""Pseudo-spectral simulator and verification suite for the magnetic Zakharov
system on a periodic torus.

The system couples a complex electric-field envelope E (vector Schroedinger
dispersion split into grad-div and curl-curl parts), a real ion-density
fluctuation n (wave equation driven by the field intensity), and a real
self-generated magnetic field B (fourth-order dispersive equation driven by
the spin density).  A fourth-order smoothing of the E-equation with strength
``epsilon`` gives the globally well-posed approximation whose exact linear
flows, conserved functionals, and vanishing-smoothing limit this package
simulates and verifies.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .grid import (  # noqa: F401
    MultiplierSpec,
    TorusGrid,
    apply_lambda,
    apply_smoother,
    curl,
    curl_curl,
    dealias,
    dispersion_matrix,
    dispersion_operator,
    divergence,
    grad_div,
    gradient,
    lambda_multiplier,
    laplacian,
    smoother_multiplier,
)
from .fields import (  # noqa: F401
    Params,
    SystemState,
    cross,
    inner,
    intensity,
    intersection_norm,
    l2_norm,
    l2_norm_sq,
    read_state_snapshot,
    sobolev_norm,
    spin_density,
    write_state_snapshot,
    zero_state,
)
from .propagators import (  # noqa: F401
    duhamel_plate,
    duhamel_wave,
    plate_free,
    schrodinger_group,
    wave_free,
)
from .integrate import (  # noqa: F401
    IntegratorConfig,
    LowFrequencyData,
    RunResult,
    from_modified,
    picard_window,
    rhs_modified,
    rhs_regularized,
    run,
    strang_step,
    to_modified,
)
from .diagnostics import (  # noqa: F401
    DiagnosticsRecord,
    GronwallEnvelope,
    ThresholdReport,
    bootstrap_root,
    gronwall_envelope,
    identity_check_grad_split,
    phi,
    psi,
    record_from_state,
    threshold_report,
)
from .groundstate import (  # noqa: F401
    GroundState,
    best_constant,
    petviashvili,
    sharp_inequality_check,
    shooting_mass,
)
from .studies import (  # noqa: F401
    ConvergenceTable,
    epsilon_convergence_study,
    frequency_split,
    kato_ponce_ratio,
    split_initial_data,
    trilinear_cancellation,
)
from .initial_data import generate_initial_data  # noqa: F401
