#include "npmix/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace npmix {

namespace {

using Key = std::tuple<int, double, double, double>;  // kind, loc, tau2, scale

Key atom_key(const Atom& a) {
  return {a.is_point() ? 0 : 1, a.loc_value(), a.tau2(), a.scale};
}

double canonical_zero(double x) { return x == 0.0 ? 0.0 : x; }  // -0 -> +0

}  // namespace

double kahan_sum(const std::vector<double>& xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

MixingDistribution::MixingDistribution(std::vector<Atom> atoms, bool symmetric)
    : symmetric_(symmetric) {
  if (atoms.empty()) throw InvalidDistribution("mixing distribution has no atoms");

  std::map<Key, Atom> merged;
  for (Atom a : atoms) {
    if (!(a.weight > 0.0))
      throw InvalidDistribution("atom weight must be positive");
    if (!(a.scale >= 0.0) || !std::isfinite(a.scale))
      throw InvalidDistribution("atom scale must be finite and >= 0");
    if (!(a.tau2() >= 0.0) || !std::isfinite(a.tau2()))
      throw InvalidDistribution("atom tau2 must be finite and >= 0");
    if (!std::isfinite(a.loc_value()))
      throw InvalidDistribution("atom location must be finite");
    // canonical form
    if (!a.is_point() && a.tau2() == 0.0)
      a.location = PointMass{std::get<NormalBlob>(a.location).mu};
    if (a.is_point())
      std::get<PointMass>(a.location).x = canonical_zero(std::get<PointMass>(a.location).x);
    else
      std::get<NormalBlob>(a.location).mu = canonical_zero(std::get<NormalBlob>(a.location).mu);
    a.scale = canonical_zero(a.scale);

    auto [it, inserted] = merged.emplace(atom_key(a), a);
    if (!inserted) it->second.weight += a.weight;
  }

  atoms_.reserve(merged.size());
  std::vector<double> weights;
  weights.reserve(merged.size());
  for (auto& [key, a] : merged) {
    atoms_.push_back(a);
    weights.push_back(a.weight);
  }

  double total = kahan_sum(weights);
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "atom weights sum to " << total << ", expected 1";
    throw InvalidDistribution(msg.str());
  }

  if (symmetric_) {
    for (const Atom& a : atoms_) {
      double v = a.loc_value();
      if (v == 0.0) continue;
      Atom mirror = a;
      if (mirror.is_point())
        std::get<PointMass>(mirror.location).x = canonical_zero(-v);
      else
        std::get<NormalBlob>(mirror.location).mu = canonical_zero(-v);
      auto it = merged.find(atom_key(mirror));
      if (it == merged.end() || it->second.weight != a.weight)
        throw InvalidDistribution(
            "symmetric mixing distribution is not mirror-closed");
    }
  }
}

void SupportSpec::validate() const {
  if (!(loc_lo < loc_hi)) throw InvalidArgument("support: loc_lo must be < loc_hi");
  if (!(scale_lo >= 0.0)) throw InvalidArgument("support: scale_lo must be >= 0");
  if (!(scale_hi >= scale_lo)) throw InvalidArgument("support: empty scale set");
  if (scale_binary && scale_hi == scale_lo)
    throw InvalidArgument("support: binary scale set needs two distinct points");
  if (symmetric && loc_lo != -loc_hi)
    throw InvalidArgument("support: symmetric interval must be [-c, c]");
}

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw NoObservations("sample is empty");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("sample values must be finite");
  std::sort(values_.begin(), values_.end());
}

bool DominatingMeasure::has_atom(double y) const {
  return std::binary_search(atom_points.begin(), atom_points.end(), y);
}

DominatingMeasure DominatingMeasure::at_observations(const Sample& sample,
                                                     bool mirrored) {
  std::vector<double> pts = sample.values();
  if (mirrored)
    for (double v : sample.values()) pts.push_back(-v);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return DominatingMeasure{std::move(pts), true};
}

}  // namespace npmix
