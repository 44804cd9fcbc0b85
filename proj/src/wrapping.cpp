#include "npmix/wrapping.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "npmix/likelihood.hpp"

namespace npmix {

MixingDistribution wrap_mixing(const MixingDistribution& pi_bar, double a_bar,
                               double b_bar) {
  if (!(0.0 < a_bar && a_bar < b_bar))
    throw InvalidArgument("wrap_mixing: need 0 < a_bar < b_bar");
  double width = a_bar + b_bar;
  double mid = 0.5 * width;

  std::vector<Atom> out;
  out.reserve(pi_bar.size());
  for (const Atom& a : pi_bar.atoms()) {
    if (a.scale < a_bar || a.scale > b_bar)
      throw ScaleOutOfRange("wrap_mixing: atom scale outside [a_bar, b_bar]");
    if (a.scale <= mid) {
      out.push_back(a);
      continue;
    }
    double s = a.scale - mid;
    double delta = s * width + 0.25 * width * width;  // s^2 + delta == t^2
    out.push_back(Atom::blob(a.loc_value(), a.tau2() + delta, s, a.weight));
  }
  return MixingDistribution(std::move(out), pi_bar.symmetric());
}

DensityGap densities_equal(const MixingDistribution& pi1,
                           const MixingDistribution& pi2, double grid_lo,
                           double grid_hi, int n_points) {
  if (n_points < 2) throw InvalidArgument("densities_equal: n_points >= 2");
  DensityGap gap;
  for (int i = 0; i < n_points; ++i) {
    double y = grid_lo + (grid_hi - grid_lo) * i / (n_points - 1);
    gap.max_density_gap = std::max(
        gap.max_density_gap,
        std::abs(mixture_density(y, pi1) - mixture_density(y, pi2)));
    gap.max_cdf_gap = std::max(
        gap.max_cdf_gap, std::abs(mixture_cdf(y, pi1) - mixture_cdf(y, pi2)));
  }
  return gap;
}

double scale_marginal_distance(const MixingDistribution& pi1,
                               const MixingDistribution& pi2) {
  std::set<double> scales;
  for (const Atom& a : pi1.atoms()) scales.insert(a.scale);
  for (const Atom& a : pi2.atoms()) scales.insert(a.scale);

  auto scale_cdf = [](const MixingDistribution& pi, double s) {
    double mass = 0.0;
    for (const Atom& a : pi.atoms())
      if (a.scale <= s) mass += a.weight;
    return mass;
  };

  double dist = 0.0;
  for (double s : scales)
    dist = std::max(dist, std::abs(scale_cdf(pi1, s) - scale_cdf(pi2, s)));
  return dist;
}

bool is_ncn_structural(const MixingDistribution& pi, bool conditional) {
  if (!conditional) {
    for (const Atom& a : pi.atoms())
      if (a.is_point()) return true;
    return false;
  }
  std::map<double, bool> has_point_at_scale;
  for (const Atom& a : pi.atoms()) {
    auto [it, inserted] = has_point_at_scale.emplace(a.scale, a.is_point());
    if (!inserted) it->second = it->second || a.is_point();
  }
  for (const auto& [scale, has_point] : has_point_at_scale)
    if (!has_point) return false;
  return true;
}

}  // namespace npmix
