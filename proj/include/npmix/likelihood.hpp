#pragma once

#include "npmix/model.hpp"

namespace npmix {

// Lebesgue density of the continuous part of F(.; pi) at y.  Point atoms
// with s = 0 live on the counting part and contribute 0 here.
double mixture_density(double y, const MixingDistribution& pi);

// Total weight of point atoms with s = 0 sitting exactly at y.
double atomic_mass(double y, const MixingDistribution& pi);

// F(y; pi) with right-continuous steps for s = 0 point atoms.
double mixture_cdf(double y, const MixingDistribution& pi);

// Empirical Bayes posterior mean E[X | Y = y].  Atomic mass at y dominates
// the continuous part.  Throws UndefinedPosterior when both vanish.
double eb_posterior_mean(double y, const MixingDistribution& pi);

// Mixed-measure log-likelihood: at a dominating-measure atom the
// contribution is the atomic mass if positive, else the Lebesgue density.
// Returns -inf (never throws) when some observation has zero contribution.
double loglik(const MixingDistribution& pi, const Sample& sample,
              const DominatingMeasure& dom);

// Kiefer-Wolfowitz pairwise criterion: sum over observations of
// log d p_hat/d(p_hat + p_tilde) - log d p_tilde/d(p_hat + p_tilde),
// evaluated on the induced mixtures.  Positive means p_hat dominates.
// May return +/-inf; throws IndeterminateDominance when both derivatives
// vanish at some observation (or when +inf and -inf terms both occur).
double gmle_dominance(const MixingDistribution& p_hat,
                      const MixingDistribution& p_tilde, const Sample& sample);

}  // namespace npmix
