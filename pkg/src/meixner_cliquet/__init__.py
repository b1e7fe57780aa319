"""Sum-cap cliquet pricing under the geometric Meixner model.

The package is layered: complex special functions and adaptive quadrature at
the bottom, the Meixner law and its Levy structure, measure changes, the
geometric stock model, the two Fourier pricing routes for the cliquet, a Monte
Carlo oracle, and a command-line front end.
"""

from .cliquet import (
    CliquetContract,
    PriceReport,
    expected_z1_dampened_fourier,
    expected_z1_quadrature,
    floor_value,
    fourier_price_integrand,
    phi_z,
    phi_z1,
    phi_z1_distribution_form,
    price_distribution_method,
    price_fourier_method,
)
from .errors import (
    BranchError,
    ConvergenceFailure,
    DivergenceDetected,
    DomainError,
    IncompatibleParams,
    InfeasibleMoments,
    MeixnerError,
    MomentExplosion,
    NonFiniteIntegrand,
    NumericalError,
    PoleError,
    SingularCombination,
)
from .market import GeometricMeixnerModel, PeriodLaw, expected_exp, martingale_drift_b, period_law, return_cdf
from .measure_change import (
    GeneralChangeResult,
    GeneralChangeSpec,
    SimpleChangeSpec,
    apply_general_change,
    apply_simple_change,
    general_change_report,
    novikov_check,
    novikov_integrand,
    radon_nikodym_h_general,
    radon_nikodym_h_simple,
    theta_shift,
)
from .meixner import (
    Cumulants,
    LevyTriplet,
    MeixnerParams,
    affine_transform,
    cdf,
    char_exponent,
    char_exponent_by_levy_khinchin,
    char_function,
    convolve,
    cumulants,
    drift_theta,
    fit_by_moments,
    levy_density,
    levy_triplet,
    log_pdf,
    pdf,
    pdf_by_inversion,
)
from .montecarlo import (
    McEstimate,
    SamplerTable,
    build_sampler,
    invert,
    mc_expectation,
    mc_expected_z1,
    mc_price,
    mc_price_batch,
    sample_y,
)
from .quadrature import (
    DISTRIBUTION_CONFIG,
    PRICING_CONFIG,
    QuadConfig,
    QuadResult,
    integrate_finite,
    integrate_principal_value,
    integrate_semi_infinite,
)
from .special import gamma_abs_squared_log, log_gamma_complex

__version__ = "0.1.0"
