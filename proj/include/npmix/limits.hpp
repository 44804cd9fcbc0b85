#pragma once

#include <functional>
#include <vector>

#include "npmix/model.hpp"

namespace npmix {

using CdfEvaluator = std::function<double(double)>;

// Solution of eta = c * exp(-c (c - eta) / b^2), the smallest root in (0, c).
// (eta = c always solves the equation and is excluded by construction.)
struct EtaSolution {
  double c = 0.0;
  double b = 0.0;
  double eta = 0.0;
  double residual = 0.0;
};

// Requires c > b > 0.  Bisection to |residual| <= 1e-12.
EtaSolution solve_eta(double c, double b);

// Predicted limit of the fitted observable cdf for the half-line support
// with binary scales: F(y ^ 0) + (1 - F(0)) Phi(y).  (For y >= 0 this is
// the continuous extension of the displayed limit; see README.)
double limit_cdf_halfline(double y, const CdfEvaluator& f_truth);

// Predicted limit of the location marginal of the fitted mixing
// distribution for the symmetric bounded support [-c, c] x [0, b]:
// symmetrized truth on the interior (-c+eta, c-eta), all remaining mass
// wrapped into the boundary bands (+-(c-eta, c)).
struct LimitMixingSummary {
  double c = 0.0;
  double b = 0.0;
  double eta = 0.0;
  double band_lo = 0.0;  // c - eta
  double band_hi = 0.0;  // c
  double band_mass_per_side = 0.0;
  std::vector<double> grid;          // interior locations
  std::vector<double> interior_cdf;  // location-marginal cdf at grid points
                                     // (left band mass included as base)
};

LimitMixingSummary limit_mixing_symmetric(const CdfEvaluator& f_truth, double c,
                                          double b, int grid_points = 201);

// Convolution density int_{-inf}^0 phi(y - x) phi(x) dx in closed form:
// (1/sqrt(2)) phi(y / sqrt(2)) Phi(-y / sqrt(2)).
double truncnorm_conv_density(double y);

// Displayed limit for the independence-constrained fit with truth N(0,1)
// and scale support containing {0} and 1:
// (1/2) Phi(y ^ 0) + 1/4 - (1/4) Phi^2(-y / sqrt(2)) + (1/2) Phi(y).
double limit_cdf_independent_gaussian(double y);

// General form F(0) F(y ^ 0) + (1 - F(0)) int_{-inf}^0 Phi(y - x) dF(x)
// + (1 - F(0)) Phi(y); the Stieltjes integral is computed by parts so the
// quadrature only sees a bounded smooth integrand.
double limit_cdf_independent_general(double y, const CdfEvaluator& f_truth);

}  // namespace npmix
