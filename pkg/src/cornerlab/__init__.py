"""cornerlab: numerical laboratory for corner configurations with lp side lengths.

Shell-window kernels and their calibrated differences, smoothed corner
counting forms, lacunary error energies, the entangled quadrilinear form,
Gowers uniformity norms, exact finite-difference identities, forbidden-gap
counterexample searches, and quadrature verifiers for the scale-invariant
integral identities, all behind a deterministic experiment harness.
"""

from .counting_forms import (
    DifferenceKernel,
    FormReport,
    LacunaryScales,
    RankOneSum,
    build_K,
    corner_form_M,
    corner_form_N,
    error_form_E,
    lacunary_energy,
    quadrilinear_form,
    theta_form,
    tuple_budget,
    worker_count,
)
from .gowers import (
    SupportedKernel,
    UniformityNormResult,
    gowers_norm,
    monotonicity_check,
    scaling_check,
    shell_u3_distance,
    von_neumann_check,
)
from .grids import (
    CostRefusalError,
    GridFunction,
    SmoothRandomField,
    UndersampledShellError,
    bernoulli_indicator,
    counter_rng,
    sign_field,
)
from .harness import (
    ARTIFACT_VERSION,
    RECIPES,
    ConfigError,
    ExperimentConfig,
    RunReport,
    emit,
    emit_config,
    parse_config,
    report_json,
    run,
)
from .identities import (
    QuadratureSpec,
    compute_D,
    default_annulus_bump,
    symbol_estimate_check,
    verify_pifourier,
    verify_schwartzgauss,
    verify_subspace_fourier,
    verify_tel_pair,
    verify_telescoping_theta,
)
from .kernels import (
    GaussianFamily,
    ScaledKernel1D,
    SmoothWindow,
    WindowKernel,
    c1,
    dilate,
    eta_floor,
    gaussian_derivative_profile_1d,
    gaussian_profile_1d,
    thin_shell_surrogate,
)
from .lp_patterns import (
    ApHit,
    CornerHit,
    Lattice,
    LpExponent,
    ShellSet,
    binomial_difference,
    bourgain_forbidden_intervals,
    find_aps,
    find_corners,
    general_forbidden_intervals,
    lift_ap_set_to_corners,
    lp_norm,
    lp_power_sum,
    max_corner_free,
    scalar_finite_difference,
    shell_membership,
    varnavides_corner_density,
)

__version__ = "0.1.0"
