#pragma once

#include "npmix/model.hpp"

namespace npmix {

// Theorem-style wrapping construction: atoms with scale t in the upper half
// of [a_bar, b_bar] are traded for normal location smears at scale
// s = t - (a_bar + b_bar)/2 with smear variance
// delta(s) = s (a_bar + b_bar) + (a_bar + b_bar)^2 / 4, so that
// s^2 + delta(s) = t^2 and the induced mixture is unchanged.
// Atoms at exactly the midpoint are kept (tie-break).
MixingDistribution wrap_mixing(const MixingDistribution& pi_bar, double a_bar,
                               double b_bar);

struct DensityGap {
  double max_density_gap = 0.0;
  double max_cdf_gap = 0.0;
};

// Max absolute density and cdf gaps between two induced mixtures over a
// uniform grid.
DensityGap densities_equal(const MixingDistribution& pi1,
                           const MixingDistribution& pi2, double grid_lo,
                           double grid_hi, int n_points);

// Sup distance between the scale-marginal cdfs of two mixing distributions
// (evaluated on the union of their scale values); used to certify that
// wrapping actually moved mass.
double scale_marginal_distance(const MixingDistribution& pi1,
                               const MixingDistribution& pi2);

// Structural no-normal-component predicate on the discrete representation:
// a location mixture containing at least one point atom cannot be a
// convolution with a nondegenerate normal (mixture-closure rule), while a
// mixture of blobs always factors one out.  With `conditional` set the
// predicate must hold for the location law at every scale; otherwise it is
// applied to the location marginal.
bool is_ncn_structural(const MixingDistribution& pi, bool conditional);

}  // namespace npmix
