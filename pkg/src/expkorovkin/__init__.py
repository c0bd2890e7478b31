"""Korovkin-type approximation on [0, inf) under power-series and integral summability.

Szász-Mirakjan based operator families are transformed by Abel, Borel or
user-supplied power-series methods, or by an integral kernel, and their
convergence on the exponential test functions is checked numerically.
"""

from .exceptions import (
    ConfigError,
    DomainError,
    KorovkinError,
    NumericalError,
    QuadratureError,
    TruncationError,
)
from .functions import (
    INF,
    HalfLineGrid,
    LimitFunction,
    constant,
    default_grid,
    evaluate,
    exp_combination,
    phi,
    rational,
    sup_norm,
)
from .integral import (
    IntegralKernel,
    QuadratureSpec,
    f_operator_closed,
    f_operator_quadrature,
    kernel_mass,
    m_bound_estimate,
    preset_abel_kernel,
    v_operator,
)
from .korovkin import (
    ExperimentConfig,
    beta,
    eth,
    holhos_bound_check,
    modulus_hat,
    mu_sup,
    rate_report_integral,
    rate_report_power_series,
    run_experiment,
)
from .operators import (
    OperatorFamily,
    SummationControl,
    exp_closed_family,
    family,
    family_eval,
    szasz_eval,
    szasz_exp_closed,
)
from .summability import (
    ApproachSchedule,
    PowerSeriesMethod,
    coefficient_method,
    limit_estimate,
    preset_abel,
    preset_borel,
    ps_transform,
    ps_transform_operator,
    regularity_check,
)

__version__ = "0.1.0"
