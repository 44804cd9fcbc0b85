#pragma once

#include "npmix/limits.hpp"
#include "npmix/model.hpp"
#include "npmix/solver.hpp"

namespace npmix {

// Replicated observations: two measurements per latent (X, S).
struct PairedSample {
  std::vector<std::pair<double, double>> pairs;

  explicit PairedSample(std::vector<std::pair<double, double>> p);
  std::size_t size() const { return pairs.size(); }
};

// Censored likelihood: negative observations collapse to the event Y <= 0.
// N- log P(Y <= 0; pi) + sum_{Y_i > 0} log density(Y_i; pi), with the s = 0
// step convention inside P(Y <= 0).
double censored_loglik(const MixingDistribution& pi, const Sample& sample);

// Truncated likelihood: all observations must be positive;
// sum_i log density(Y_i; pi) - n log P(Y > 0; pi).
// Throws ZeroTruncationMass when P(Y > 0; pi) vanishes.
double truncated_loglik(const MixingDistribution& pi, const Sample& sample);

// Joint density of a replicated pair; always <= 2 / (pi (y1 - y2)^2).
// Requires every atom scale > 0.
double bivariate_density(double y1, double y2, const MixingDistribution& pi);

// MLE for the replicated model by EM over (location, scale) components
// against the pure Lebesgue dominating measure.
FitResult fit_replicated(const PairedSample& sample, const SupportSpec& spec,
                         const FitConfig& cfg = {});

// Independence-constrained fit for loc = (-inf, 0] with 0 in the scale set:
// q_hat = #{Y_i <= 0}/n, location atoms at the nonpositive observations plus
// one at 0, and the continuous scale mixture fitted by EM maximizing
// sum_{Y_i > 0} log g(Y_i).  See README for how the observable cdf is
// assembled.
FitResult fit_independent(const Sample& sample, const SupportSpec& spec,
                          const FitConfig& cfg = {});

// Discrete scale distribution maximizing the Kullback-Leibler affinity
// int_0^inf log( int (1/s) phi(y/s) dH(s) ) dG(y) over weights on a fixed
// scale grid, by multiplicative EM updates.
struct ScaleMixture {
  std::vector<double> scales;
  std::vector<double> weights;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

ScaleMixture kl_scale_projection(const CdfEvaluator& g_cdf, double b,
                                 const std::vector<double>& scale_grid);

// Same objective against a finite sample (nodes with masses); this is the
// exact discrete case used by fit_independent.
ScaleMixture kl_scale_projection_discrete(const std::vector<double>& values,
                                          const std::vector<double>& masses,
                                          double b,
                                          const std::vector<double>& scale_grid);

}  // namespace npmix
