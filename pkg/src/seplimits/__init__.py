"""Minimax resolution limits for two-point-source separation estimation.

Computes worst-case lower bounds on the separation error (closed forms,
general Bayesian information functionals, and the variational ground-state
bound), exact and Monte Carlo error evaluation of the maximum-likelihood
estimators for the mode-sorting and direct-imaging measurements, and
photon-number scaling studies.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    PriorDensity,
    bayesian_information,
    bound_report,
    direct_minimax_bound_closed,
    ground_state,
    hermite_prior,
    hermite_prior_density,
    optimal_w,
    prior_information,
    spade_minimax_bound,
)
from .errors import InvalidInputError, NumericalError, SepLimitsError
from .estimators import (
    EstimatorKind,
    direct_log_likelihood,
    direct_ml,
    expected_sqrt_poisson,
    spade_exact_mse,
    spade_mean_count,
    spade_ml,
    spade_modified_ml,
    spade_mse_upper_bound,
    verify_sqrt_inequality,
)
from .model import (
    FisherCurve,
    ImagingConfig,
    Scheme,
    crb,
    fisher_direct,
    fisher_direct_curve,
    fisher_direct_quadratic_bound,
    fisher_spade,
    intensity_profile,
)
from .simulate import (
    MseCurve,
    ScalingResult,
    SweepConfig,
    bayes_risk_mc,
    mse_sweep,
    sample_direct,
    sample_spade,
    scaling_sweep,
    sup_mse,
)
from .streams import poisson_sample, substream

__all__ = [
    "__version__",
    "BoundReport",
    "EstimatorKind",
    "FisherCurve",
    "ImagingConfig",
    "InvalidInputError",
    "MseCurve",
    "NumericalError",
    "PriorDensity",
    "ScalingResult",
    "Scheme",
    "SepLimitsError",
    "SweepConfig",
    "bayes_risk_mc",
    "bayesian_information",
    "bound_report",
    "crb",
    "direct_log_likelihood",
    "direct_minimax_bound_closed",
    "direct_ml",
    "expected_sqrt_poisson",
    "fisher_direct",
    "fisher_direct_curve",
    "fisher_direct_quadratic_bound",
    "fisher_spade",
    "ground_state",
    "hermite_prior",
    "hermite_prior_density",
    "intensity_profile",
    "mse_sweep",
    "optimal_w",
    "poisson_sample",
    "prior_information",
    "sample_direct",
    "sample_spade",
    "scaling_sweep",
    "spade_exact_mse",
    "spade_mean_count",
    "spade_minimax_bound",
    "spade_ml",
    "spade_modified_ml",
    "spade_mse_upper_bound",
    "substream",
    "sup_mse",
    "verify_sqrt_inequality",
]
