#include "npmix/likelihood.hpp"

#include <algorithm>
#include <cmath>

namespace npmix {

namespace {

// Continuous-part density of one atom at y, with the location optionally
// negated (mirror evaluation).
double atom_density(double y, const Atom& a, bool mirrored) {
  double loc = mirrored ? -a.loc_value() : a.loc_value();
  if (a.is_point()) {
    if (a.scale == 0.0) return 0.0;
    return norm_pdf((y - loc) / a.scale) / a.scale;
  }
  double sd = std::sqrt(a.total_var());
  return norm_pdf((y - loc) / sd) / sd;
}

double atom_cdf(double y, const Atom& a, bool mirrored) {
  double loc = mirrored ? -a.loc_value() : a.loc_value();
  if (a.is_point() && a.scale == 0.0) return loc <= y ? 1.0 : 0.0;
  return norm_cdf((y - loc) / std::sqrt(a.total_var()));
}

// Sums f(atom, mirrored) over the atom set.  For symmetric distributions
// mirror pairs are summed together (atoms with negative location are
// skipped and re-derived from their positive representative) so that
// symmetry identities hold bit-exactly.
template <typename F>
double sum_over_atoms(const MixingDistribution& pi, F&& f) {
  double total = 0.0;
  if (pi.symmetric()) {
    for (const Atom& a : pi.atoms()) {
      double v = a.loc_value();
      if (v < 0.0) continue;
      double term = f(a, false);
      if (v > 0.0) term += f(a, true);
      total += term;
    }
  } else {
    for (const Atom& a : pi.atoms()) total += f(a, false);
  }
  return total;
}

}  // namespace

double mixture_density(double y, const MixingDistribution& pi) {
  double d = sum_over_atoms(pi, [y](const Atom& a, bool mirrored) {
    return a.weight * atom_density(y, a, mirrored);
  });
  return flush_tiny(d);
}

double atomic_mass(double y, const MixingDistribution& pi) {
  double mass = 0.0;
  for (const Atom& a : pi.atoms())
    if (a.is_point() && a.scale == 0.0 && a.loc_value() == y) mass += a.weight;
  return mass;
}

double mixture_cdf(double y, const MixingDistribution& pi) {
  double c = sum_over_atoms(pi, [y](const Atom& a, bool mirrored) {
    return a.weight * atom_cdf(y, a, mirrored);
  });
  return std::min(c, 1.0);
}

double eb_posterior_mean(double y, const MixingDistribution& pi) {
  if (atomic_mass(y, pi) > 0.0) return y;  // the atom's conditional law is degenerate at y

  double num = sum_over_atoms(pi, [y](const Atom& a, bool mirrored) {
    double loc = mirrored ? -a.loc_value() : a.loc_value();
    double dens = atom_density(y, a, mirrored);
    double post_mean = loc;
    if (!a.is_point()) {
      double shrink = a.tau2() / a.total_var();  // normal-normal conjugacy
      post_mean = loc + shrink * (y - loc);
    }
    return a.weight * post_mean * dens;
  });
  double den = mixture_density(y, pi);
  if (den < kDensityFloor)
    throw UndefinedPosterior("no density or atomic mass at y");
  return num / den;
}

double loglik(const MixingDistribution& pi, const Sample& sample,
              const DominatingMeasure& dom) {
  if (!dom.atom_points.empty())
    for (double y : sample.values())
      if (!dom.has_atom(y))
        throw InvalidArgument(
            "dominating measure has atoms but misses an observation");

  double total = 0.0;
  for (double y : sample.values()) {
    double contrib;
    if (dom.has_atom(y)) {
      double am = atomic_mass(y, pi);
      contrib = am > 0.0 ? am : mixture_density(y, pi);
    } else {
      contrib = mixture_density(y, pi);
    }
    if (contrib < kDensityFloor) return kNegInf;
    total += std::log(contrib);
  }
  return total;
}

double gmle_dominance(const MixingDistribution& p_hat,
                      const MixingDistribution& p_tilde, const Sample& sample) {
  double finite_sum = 0.0;
  bool pos_inf = false, neg_inf = false;
  for (double y : sample.values()) {
    double a_hat = atomic_mass(y, p_hat);
    double a_til = atomic_mass(y, p_tilde);
    double r_hat, r_til;
    if (a_hat > 0.0 || a_til > 0.0) {
      // against an atom of the sum measure, a continuous density contributes 0
      r_hat = a_hat;
      r_til = a_til;
    } else {
      r_hat = mixture_density(y, p_hat);
      r_til = mixture_density(y, p_tilde);
    }
    if (r_hat <= 0.0 && r_til <= 0.0)
      throw IndeterminateDominance(
          "both Radon-Nikodym derivatives vanish at an observation");
    if (r_hat <= 0.0)
      neg_inf = true;
    else if (r_til <= 0.0)
      pos_inf = true;
    else
      finite_sum += std::log(r_hat) - std::log(r_til);
  }
  if (pos_inf && neg_inf)
    throw IndeterminateDominance("criterion has both +inf and -inf terms");
  if (pos_inf) return kPosInf;
  if (neg_inf) return kNegInf;
  return finite_sum;
}

}  // namespace npmix
