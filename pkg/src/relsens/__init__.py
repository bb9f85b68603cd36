"""Reliability analysis with variance-based reliability sensitivity indices."""

from .distributions import (
    Kind,
    MarginalDistribution,
    from_moments,
    lognormal,
    normal,
    std_normal_cdf,
    std_normal_quantile,
    truncated_normal,
    uniform,
)
from .form import (
    FormResult,
    alpha_to_linear_indices,
    analytic_dpf_dvar,
    form_search,
    linear_form_analytic,
)
from .limit_state import LimitState, indicator, linear, parse_expression, terzaghi_bearing
from .sampling import (
    Method,
    PfEstimate,
    SampleBatch,
    SamplingPlan,
    pf_to_beta,
    run_importance_sampling,
    run_monte_carlo,
)
from .sensitivity import (
    SensitivityResult,
    linear_sobol,
    modified_covariance,
    reliability_sensitivities,
    scale_factors,
)
from .transform import NatafTransform, build, joint_normal_logpdf, joint_normal_pdf

__version__ = "0.1.0"
