"""Generalized maximum likelihood estimation for normal location-scale mixtures."""

from npmix._core import (  # noqa: F401
    MixingDistribution,
    NpmixError,
    atomic_mass,
    bivariate_density,
    cdf,
    censored_loglik,
    density,
    densities_equal,
    dominance,
    fit_gmle,
    fit_independent,
    fit_replicated,
    is_ncn_structural,
    kl_scale_projection,
    limit_cdf_halfline,
    limit_cdf_independent_gaussian,
    limit_cdf_independent_general,
    loglik,
    posterior_mean,
    sample_mixture,
    scale_marginal_distance,
    solve_eta,
    truncated_loglik,
    truncnorm_conv_density,
    wrap_mixing,
)

__all__ = [
    "MixingDistribution",
    "NpmixError",
    "atomic_mass",
    "bivariate_density",
    "cdf",
    "censored_loglik",
    "density",
    "densities_equal",
    "dominance",
    "fit_gmle",
    "fit_independent",
    "fit_replicated",
    "is_ncn_structural",
    "kl_scale_projection",
    "limit_cdf_halfline",
    "limit_cdf_independent_gaussian",
    "limit_cdf_independent_general",
    "loglik",
    "posterior_mean",
    "sample_mixture",
    "scale_marginal_distance",
    "solve_eta",
    "truncated_loglik",
    "truncnorm_conv_density",
    "wrap_mixing",
]
