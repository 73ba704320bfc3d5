"""Frank copula sampling, estimation of the association parameter, and simulation tools."""

from .copula import (
    THETA_MAX,
    AssociationParameter,
    BivariateSample,
    UnitPair,
    conditional_cdf,
    frank_cdf,
    frank_log_pdf,
    frank_pdf,
    score_single,
)
from .debye import debye_dk, rho_of_theta, tau_of_theta
from .estimators import (
    EstimateResult,
    Method,
    RawBivariateData,
    h_at_zero_limit,
    h_of_theta,
    kendall_tau_hat,
    log_likelihood,
    mle_estimate,
    mme_rho_estimate,
    mme_tau_estimate,
    pseudo_observations,
    spearman_rho_hat,
)
from .fisher import FisherResult, asymptotic_variance, fisher_information, i1_term, i2_monte_carlo, i2_quadrature, j_ratio
from .quadrature import QuadratureSpec, Rule
from .sampler import SeedSpec, sample_n, sample_pair

__all__ = [name for name in dir() if not name.startswith("_")]
