#include "npmix/limits.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "npmix/quadrature.hpp"

namespace npmix {

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
  double error = 0.0;
  double scale = std::max(1.0, std::abs(hi - lo));
  double value = Integrator::integrate(f, lo, hi, 15, abs_tol / scale, &error);
  if (!(error <= abs_tol * scale) || !std::isfinite(value))
    throw QuadratureFailure("integral did not converge to tolerance");
  return value;
}

EtaSolution solve_eta(double c, double b) {
  if (!(c > 0.0) || !(b > 0.0)) throw InvalidArgument("solve_eta: need c, b > 0");
  if (!(c > b)) throw InvalidArgument("solve_eta: need c > b");

  auto g = [c, b](double eta) {
    return eta - c * std::exp(-c * (c - eta) / (b * b));
  };
  // g is concave with g(0) < 0 and g(c) = 0, g'(c) = 1 - c^2/b^2 < 0, so the
  // interior root is unique; bracket against the excluded root at c.
  double lo = 1e-308, hi = c - 1e-12;
  if (!(g(lo) < 0.0) || !(g(hi) > 0.0))
    throw NoInteriorRoot("solve_eta: no sign change in (0, c)");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  double eta = 0.5 * (lo + hi);
  double residual = g(eta);
  if (std::abs(residual) > 1e-12)
    throw NoInteriorRoot("solve_eta: bisection residual above tolerance");
  return EtaSolution{c, b, eta, residual};
}

double limit_cdf_halfline(double y, const CdfEvaluator& f_truth) {
  return f_truth(std::min(y, 0.0)) + (1.0 - f_truth(0.0)) * norm_cdf(y);
}

LimitMixingSummary limit_mixing_symmetric(const CdfEvaluator& f_truth, double c,
                                          double b, int grid_points) {
  if (grid_points < 2) throw InvalidArgument("limit_mixing_symmetric: grid_points >= 2");
  EtaSolution sol = solve_eta(c, b);
  double eta = sol.eta;
  double lo = -c + eta, hi = c - eta;

  // Symmetrized truth: Fs(x) = (F(x) + 1 - F(-x)) / 2.
  auto fs = [&](double x) { return 0.5 * (f_truth(x) + 1.0 - f_truth(-x)); };

  LimitMixingSummary out;
  out.c = c;
  out.b = b;
  out.eta = eta;
  out.band_lo = hi;
  out.band_hi = c;
  // Mass pushed into one boundary band: the symmetrized truth's own band
  // mass plus half of everything beyond +-c.
  out.band_mass_per_side = (fs(c) - fs(hi)) + (1.0 - fs(c));

  out.grid.reserve(grid_points);
  out.interior_cdf.reserve(grid_points);
  double base = out.band_mass_per_side;  // mirror band sits below the interior
  for (int i = 0; i < grid_points; ++i) {
    double x = lo + (hi - lo) * i / (grid_points - 1);
    out.grid.push_back(x);
    out.interior_cdf.push_back(base + (fs(x) - fs(lo)));
  }
  return out;
}

double truncnorm_conv_density(double y) {
  return kInvSqrt2 * norm_pdf(y * kInvSqrt2) * norm_cdf(-y * kInvSqrt2);
}

double limit_cdf_independent_gaussian(double y) {
  double t = norm_cdf(-y * kInvSqrt2);
  return 0.5 * norm_cdf(std::min(y, 0.0)) + 0.25 - 0.25 * t * t +
         0.5 * norm_cdf(y);
}

double limit_cdf_independent_general(double y, const CdfEvaluator& f_truth) {
  double f0 = f_truth(0.0);
  // Integration by parts: int_{-inf}^0 Phi(y-x) dF(x)
  //   = Phi(y) F(0) + int_{-inf}^0 phi(y-x) F(x) dx.
  // The integrand is bounded by phi, so truncating at |y - x| > 40 is exact
  // to double precision.
  double lo = std::min(y - 40.0, -40.0);
  double stieltjes =
      norm_cdf(y) * f0 +
      integrate([&](double x) { return norm_pdf(y - x) * f_truth(x); }, lo, 0.0,
                1e-9);
  return f0 * f_truth(std::min(y, 0.0)) + (1.0 - f0) * stieltjes +
         (1.0 - f0) * norm_cdf(y);
}

}  // namespace npmix
