#include "npmix/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "npmix/likelihood.hpp"

namespace npmix {

namespace {

struct Component {
  double x;  // representative location (>= 0 under a symmetric spec)
  double s;  // scale, > 0
  double w;  // full component weight (both mirror atoms together)
};

// Everything the EM inner loop needs besides the component state.
struct EmProblem {
  std::vector<double> ys;  // observations entering the E-step
  bool mirrored = false;
  double loc_min = kNegInf, loc_max = kPosInf;
  double s_min = 0.0, s_max = 0.0;
  bool scales_frozen = false;  // binary scale sets: only weights/locations move
  double total_weight = 0.0;   // fixed total weight of the continuous part
  // consolidate locations onto the mirror boundary: representatives heading
  // for x = 0 approach it geometrically and never land, so the fit loops
  // snap anything inside this distance (the public single-step operation
  // leaves it off)
  double boundary_snap = 0.0;
};

double log_sum_exp_pair(double a, double b) {
  double m = std::max(a, b);
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Log-density of the continuous part at y (up to the 1/sqrt(2pi) factor and
// the 1/2 mirror split), via log-sum-exp over components.
double continuous_logdensity(const std::vector<Component>& comps, double y,
                             bool mirrored) {
  double lse = kNegInf;
  for (const Component& c : comps) {
    double base = std::log(c.w) - std::log(c.s);
    double za = (y - c.x) / c.s;
    double term = base - 0.5 * za * za;
    if (mirrored) {
      double zb = (y + c.x) / c.s;
      term = log_sum_exp_pair(term, base - 0.5 * zb * zb);
    }
    lse = log_sum_exp_pair(lse, term);
  }
  double log_const =
      std::log(kInvSqrt2Pi) + (mirrored ? std::log(0.5) : 0.0);
  return lse + log_const;
}

double em_loglik(const std::vector<Component>& comps, const EmProblem& prob) {
  double total = 0.0;
  for (double y : prob.ys) {
    double ld = continuous_logdensity(comps, y, prob.mirrored);
    if (ld == kNegInf) return kNegInf;
    total += ld;
  }
  return total;
}

// One E+M sweep.  Responsibilities are computed in log space so far-out
// observations cannot underflow the normalization.
std::vector<Component> em_sweep(const std::vector<Component>& comps,
                                const EmProblem& prob,
                                double weight_floor) {
  std::size_t m = comps.size();
  std::vector<double> tot(m, 0.0), s1(m, 0.0);
  std::vector<std::vector<double>> alpha(m), alpha_mirror(m);
  for (std::size_t j = 0; j < m; ++j) {
    alpha[j].assign(prob.ys.size(), 0.0);
    if (prob.mirrored) alpha_mirror[j].assign(prob.ys.size(), 0.0);
  }

  std::vector<double> la(m), lat(m);
  for (std::size_t i = 0; i < prob.ys.size(); ++i) {
    double y = prob.ys[i];
    double lse = kNegInf;
    for (std::size_t j = 0; j < m; ++j) {
      double base = std::log(comps[j].w) - std::log(comps[j].s);
      double za = (y - comps[j].x) / comps[j].s;
      la[j] = base - 0.5 * za * za;
      lse = log_sum_exp_pair(lse, la[j]);
      if (prob.mirrored) {
        double zb = (y + comps[j].x) / comps[j].s;
        lat[j] = base - 0.5 * zb * zb;
        lse = log_sum_exp_pair(lse, lat[j]);
      }
    }
    if (lse == kNegInf)
      throw InvalidArgument("em_step: an observation has zero likelihood");
    for (std::size_t j = 0; j < m; ++j) {
      double a = std::exp(la[j] - lse);
      double at = prob.mirrored ? std::exp(lat[j] - lse) : 0.0;
      alpha[j][i] = a;
      if (prob.mirrored) alpha_mirror[j][i] = at;
      tot[j] += a + at;
      s1[j] += (a - at) * y;
    }
  }

  std::vector<Component> out(comps);
  double n_em = static_cast<double>(prob.ys.size());
  for (std::size_t j = 0; j < m; ++j) {
    if (tot[j] > 0.0) {
      double x = std::clamp(s1[j] / tot[j], prob.loc_min, prob.loc_max);
      if (prob.mirrored && x < prob.boundary_snap) x = 0.0;
      out[j].x = x;
      if (!prob.scales_frozen) {
        double s2 = 0.0;
        for (std::size_t i = 0; i < prob.ys.size(); ++i) {
          double y = prob.ys[i];
          double d = y - x;
          s2 += alpha[j][i] * d * d;
          if (prob.mirrored) {
            double dm = y + x;
            s2 += alpha_mirror[j][i] * dm * dm;
          }
        }
        out[j].s = std::clamp(std::sqrt(s2 / tot[j]), prob.s_min, prob.s_max);
      }
    }
    out[j].w = prob.total_weight * tot[j] / n_em;
  }

  // prune and renormalize to the fixed continuous total
  std::vector<Component> kept;
  kept.reserve(out.size());
  for (const Component& c : out)
    if (c.w >= weight_floor) kept.push_back(c);
  if (kept.empty()) {
    auto it = std::max_element(out.begin(), out.end(),
                               [](auto& a, auto& b) { return a.w < b.w; });
    kept.push_back(*it);
  }
  std::vector<double> ws;
  ws.reserve(kept.size());
  for (const Component& c : kept) ws.push_back(c.w);
  double norm = prob.total_weight / kahan_sum(ws);
  for (Component& c : kept) c.w *= norm;
  return kept;
}

// Merge components that collapsed onto the same (x, s) point, so long runs
// of EM do not carry bundles of coincident atoms.  The heavier constituent
// keeps its coordinates (averaging would pull exact boundary points off the
// boundary).
std::vector<Component> merge_close(std::vector<Component> comps) {
  std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.x != b.x ? a.x < b.x : a.s < b.s;
  });
  std::vector<Component> out;
  for (const Component& c : comps) {
    if (!out.empty() && std::abs(out.back().x - c.x) <= 1e-8 &&
        std::abs(out.back().s - c.s) <= 1e-8) {
      Component& m = out.back();
      if (c.w > m.w) {
        m.x = c.x;
        m.s = c.s;
      }
      m.w += c.w;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// Pinned point masses at the in-support observations, with the closed-form
// weights (1/n, or 1/(2n) per mirror atom under a symmetric spec).
std::map<double, double> pinned_weights(const std::vector<double>& in_obs,
                                        std::size_t n, bool symmetric) {
  std::map<double, double> pinned;
  double n_d = static_cast<double>(n);
  for (double y : in_obs) {
    if (symmetric) {
      if (y == 0.0) {
        pinned[0.0] += 1.0 / n_d;
      } else {
        pinned[y] += 1.0 / (2.0 * n_d);
        pinned[-y] += 1.0 / (2.0 * n_d);
      }
    } else {
      pinned[y] += 1.0 / n_d;
    }
  }
  return pinned;
}

double pinned_loglik(const std::map<double, double>& pinned,
                     const std::vector<double>& in_obs) {
  double total = 0.0;
  for (double y : in_obs) total += std::log(pinned.at(y));
  return total;
}

MixingDistribution materialize(const std::map<double, double>& pinned,
                               const std::vector<Component>& comps,
                               bool symmetric) {
  std::vector<Atom> atoms;
  atoms.reserve(pinned.size() + 2 * comps.size());
  for (const auto& [x, w] : pinned) atoms.push_back(Atom::point(x, 0.0, w));
  for (const Component& c : comps) {
    if (symmetric && c.x != 0.0) {
      atoms.push_back(Atom::point(c.x, c.s, 0.5 * c.w));
      atoms.push_back(Atom::point(-c.x, c.s, 0.5 * c.w));
    } else {
      atoms.push_back(Atom::point(c.x, c.s, c.w));
    }
  }
  return MixingDistribution(std::move(atoms), symmetric);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i)
    xs[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return xs;
}

std::vector<double> geomspace(double lo, double hi, int n) {
  std::vector<double> xs(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    xs[i] = n == 1 ? hi : std::exp(llo + (lhi - llo) * i / (n - 1));
  return xs;
}

// Effective location range for grids when the spec interval is unbounded.
std::pair<double, double> effective_loc_range(const Sample& sample,
                                              const SupportSpec& spec) {
  double lo = std::max(spec.loc_lo, std::min(sample.min(), spec.loc_hi));
  double hi = std::min(spec.loc_hi, std::max(sample.max(), spec.loc_lo));
  return {lo, hi};
}

std::vector<double> continuous_scale_grid(const SupportSpec& spec,
                                          const FitConfig& cfg) {
  if (spec.scale_binary) {
    if (spec.scale_lo > 0.0) return {spec.scale_lo, spec.scale_hi};
    return {spec.scale_hi};
  }
  double s_min = std::max(spec.scale_lo, cfg.scale_floor);
  return geomspace(s_min, std::max(spec.scale_hi, s_min), cfg.scale_grid_size);
}

FitResult empirical_fit(const Sample& sample, const SupportSpec& spec,
                        const FitConfig& cfg);
FitResult fit_em(const Sample& sample, const SupportSpec& spec,
                 const FitConfig& cfg);

}  // namespace

void FitConfig::validate() const {
  if (loc_grid_size < 2 || scale_grid_size < 2)
    throw InvalidArgument("fit config: grids must have >= 2 points");
  if (!(loglik_rel_tol > 0.0) || !(atom_weight_floor > 0.0) ||
      !(scale_floor > 0.0))
    throw InvalidArgument("fit config: tolerances must be positive");
  if (max_em_iters < 0) throw InvalidArgument("fit config: max_em_iters < 0");
}

FitResult fit_gmle(const Sample& sample, const SupportSpec& spec,
                   const FitConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (sample.size() == 0) throw NoObservations("fit_gmle: empty sample");

  if (spec.loc_is_real_line() && spec.scale_contains_zero())
    return empirical_fit(sample, spec, cfg);
  if (spec.loc_is_neg_halfline() && spec.scale_binary && spec.scale_lo == 0.0 &&
      spec.scale_hi == 1.0) {
    FitResult fit = closed_form_halfline(sample);
    fit.gradient_sup =
        certify_gmle(fit, sample, spec, default_candidate_grid(sample, spec, cfg));
    return fit;
  }
  return fit_em(sample, spec, cfg);
}

FitResult closed_form_halfline(const Sample& sample) {
  std::size_t n = sample.size();
  double n_d = static_cast<double>(n);
  std::map<double, double> pinned;
  std::size_t n_pos = 0;
  for (double y : sample.values()) {
    if (y <= 0.0)
      pinned[y] += 1.0 / n_d;
    else
      ++n_pos;
  }
  double q_pos = static_cast<double>(n_pos) / n_d;

  std::vector<Atom> atoms;
  double ll = 0.0;
  for (const auto& [x, w] : pinned) {
    atoms.push_back(Atom::point(x, 0.0, w));
    ll += w * n_d * std::log(w);  // multiplicity * log(atomic mass)
  }
  if (n_pos > 0) atoms.push_back(Atom::point(0.0, 1.0, q_pos));
  for (double y : sample.values())
    if (y > 0.0) ll += std::log(q_pos) + log_norm_pdf(y);

  FitResult fit;
  fit.pi_hat = MixingDistribution(std::move(atoms), false);
  fit.final_loglik = ll;
  fit.iterations = 0;
  fit.converged = true;
  SupportSpec spec = SupportSpec::halfline_binary();
  fit.gradient_sup =
      certify_gmle(fit, sample, spec, default_candidate_grid(sample, spec, {}));
  return fit;
}

MixingDistribution em_step(const MixingDistribution& pi, const Sample& sample,
                           const SupportSpec& spec, const FitConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.loc_is_real_line() && spec.scale_contains_zero())
    throw UnboundedProblem(
        "em_step: unrestricted locations with s = 0 admitted; use the "
        "empirical closed form");

  EmProblem prob;
  prob.mirrored = spec.symmetric;
  bool pin = spec.scale_contains_zero();
  for (double y : sample.values())
    if (!pin || !spec.contains_location(y)) prob.ys.push_back(y);
  if (prob.ys.empty())
    throw EmptyResponsibility("em_step: no out-of-support observations");

  prob.loc_min = spec.symmetric ? 0.0 : spec.loc_lo;
  prob.loc_max = spec.loc_hi;
  prob.s_min = std::max(spec.scale_lo, cfg.scale_floor);
  prob.s_max = spec.scale_hi;
  prob.scales_frozen = spec.scale_binary;

  std::map<double, double> pinned;
  std::vector<Component> comps;
  for (const Atom& a : pi.atoms()) {
    if (a.is_point() && a.scale == 0.0) {
      pinned[a.loc_value()] += a.weight;
      continue;
    }
    if (!a.is_point())
      throw InvalidArgument("em_step: blob-located components not supported");
    double x = a.loc_value();
    if (spec.symmetric) {
      if (x < 0.0) continue;  // covered by the positive representative
      comps.push_back({x, a.scale, x == 0.0 ? a.weight : 2.0 * a.weight});
    } else {
      comps.push_back({x, a.scale, a.weight});
    }
  }
  if (comps.empty())
    throw InvalidArgument("em_step: no continuous components to update");

  std::vector<double> ws;
  for (const Component& c : comps) ws.push_back(c.w);
  prob.total_weight = kahan_sum(ws);

  comps = em_sweep(comps, prob, cfg.atom_weight_floor);
  return materialize(pinned, comps, spec.symmetric);
}

namespace {

FitResult empirical_fit(const Sample& sample, const SupportSpec& spec,
                        const FitConfig& cfg) {
  std::size_t n = sample.size();
  double n_d = static_cast<double>(n);
  std::map<double, std::size_t> counts;
  for (double y : sample.values()) counts[y] += 1;

  std::vector<Atom> atoms;
  atoms.reserve(counts.size());
  double tie_term = 0.0;  // sum of m log m over tied values
  for (const auto& [y, m] : counts) {
    atoms.push_back(Atom::point(y, 0.0, static_cast<double>(m) / n_d));
    if (m > 1)
      tie_term += static_cast<double>(m) * std::log(static_cast<double>(m));
  }

  FitResult fit;
  fit.pi_hat = MixingDistribution(std::move(atoms), false);
  fit.final_loglik = tie_term - n_d * std::log(n_d);
  fit.iterations = 0;
  fit.converged = true;
  fit.gradient_sup =
      certify_gmle(fit, sample, spec, default_candidate_grid(sample, spec, cfg));
  return fit;
}

FitResult fit_em(const Sample& sample, const SupportSpec& spec,
                 const FitConfig& cfg) {
  std::size_t n = sample.size();
  double n_d = static_cast<double>(n);
  bool pin = spec.scale_contains_zero();

  std::vector<double> in_obs;
  EmProblem prob;
  prob.mirrored = spec.symmetric;
  for (double y : sample.values()) {
    if (pin && spec.contains_location(y))
      in_obs.push_back(y);
    else
      prob.ys.push_back(y);
  }

  std::map<double, double> pinned = pinned_weights(in_obs, n, spec.symmetric);
  double pin_ll = pinned_loglik(pinned, in_obs);

  FitResult fit;
  if (prob.ys.empty()) {
    fit.pi_hat = materialize(pinned, {}, spec.symmetric);
    fit.final_loglik = pin_ll;
    fit.iterations = 0;
    fit.converged = true;
    fit.gradient_sup = certify_gmle(fit, sample, spec,
                                    default_candidate_grid(sample, spec, cfg));
    return fit;
  }

  prob.loc_min = spec.symmetric ? 0.0 : spec.loc_lo;
  prob.loc_max = spec.loc_hi;
  prob.s_min = std::max(spec.scale_lo, cfg.scale_floor);
  prob.s_max = spec.scale_hi;
  prob.scales_frozen = spec.scale_binary;
  prob.total_weight = static_cast<double>(prob.ys.size()) / n_d;
  prob.boundary_snap = 1e-6;

  std::vector<double> loc_grid;
  if (spec.symmetric) {
    double hi = std::isfinite(spec.loc_hi)
                    ? spec.loc_hi
                    : std::max(std::abs(sample.min()), std::abs(sample.max()));
    loc_grid = linspace(0.0, hi, cfg.loc_grid_size);
  } else {
    auto [lo, hi] = effective_loc_range(sample, spec);
    loc_grid = linspace(lo, hi, cfg.loc_grid_size);
  }
  std::vector<double> scale_grid = continuous_scale_grid(spec, cfg);

  std::vector<Component> comps;
  comps.reserve(loc_grid.size() * scale_grid.size());
  double w0 =
      prob.total_weight / static_cast<double>(loc_grid.size() * scale_grid.size());
  for (double x : loc_grid)
    for (double s : scale_grid) comps.push_back({x, s, w0});

  double ll = pin_ll + em_loglik(comps, prob);
  int iters = 0;
  bool converged = false;
  for (; iters < cfg.max_em_iters; ++iters) {
    comps = merge_close(em_sweep(comps, prob, cfg.atom_weight_floor));
    double new_ll = pin_ll + em_loglik(comps, prob);
    double improvement = new_ll - ll;
    ll = new_ll;
    if (improvement < cfg.loglik_rel_tol * std::max(1.0, std::abs(new_ll))) {
      converged = true;
      ++iters;
      break;
    }
  }

  fit.pi_hat = materialize(pinned, comps, spec.symmetric);
  fit.final_loglik = ll;
  fit.iterations = iters;
  fit.converged = converged;
  fit.gradient_sup =
      certify_gmle(fit, sample, spec, default_candidate_grid(sample, spec, cfg));
  return fit;
}

}  // namespace

CandidateGrid default_candidate_grid(const Sample& sample,
                                     const SupportSpec& spec,
                                     const FitConfig& cfg) {
  CandidateGrid grid;
  if (spec.symmetric) {
    double hi = std::isfinite(spec.loc_hi)
                    ? spec.loc_hi
                    : std::max(std::abs(sample.min()), std::abs(sample.max()));
    grid.locations = linspace(0.0, hi, 2 * cfg.loc_grid_size + 1);
  } else {
    auto [lo, hi] = effective_loc_range(sample, spec);
    grid.locations = linspace(lo, hi, 2 * cfg.loc_grid_size + 1);
  }
  if (spec.scale_binary) {
    grid.scales = {spec.scale_hi};
    if (spec.scale_lo > 0.0) grid.scales.push_back(spec.scale_lo);
  } else {
    double s_min = std::max(spec.scale_lo, cfg.scale_floor);
    grid.scales =
        geomspace(s_min, std::max(spec.scale_hi, s_min), 2 * cfg.scale_grid_size);
  }
  grid.points_at_observations = spec.scale_contains_zero();
  return grid;
}

double certify_gmle(const FitResult& fit, const Sample& sample,
                    const SupportSpec& spec, const CandidateGrid& grid) {
  std::size_t n = sample.size();
  double n_d = static_cast<double>(n);

  // per-observation fitted likelihood under the mixed-measure convention
  std::vector<double> fhat(n);
  std::vector<bool> atomic(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = sample.values()[i];
    double am = atomic_mass(y, fit.pi_hat);
    atomic[i] = am > 0.0;
    fhat[i] = atomic[i] ? am : mixture_density(y, fit.pi_hat);
    if (fhat[i] <= 0.0)
      throw InvalidArgument("certify_gmle: fit has zero likelihood at an observation");
  }

  double sup = kNegInf;
  auto consider = [&](double value) { sup = std::max(sup, value); };

  // sum of 1/fhat over atomic observations exactly equal to x
  auto atomic_inv_sum = [&](double x) {
    const auto& ys = sample.values();
    auto [lo, hi] = std::equal_range(ys.begin(), ys.end(), x);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      std::size_t i = static_cast<std::size_t>(it - ys.begin());
      if (atomic[i]) acc += 1.0 / fhat[i];
    }
    return acc;
  };
  auto point_candidate_value = [&](double x) {
    double acc = spec.symmetric
                     ? 0.5 * (atomic_inv_sum(x) + atomic_inv_sum(-x))
                     : atomic_inv_sum(x);
    return acc / n_d - 1.0;
  };
  auto continuous_candidate_value = [&](double x, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (atomic[i]) continue;  // density contributes 0 against an atom
      double y = sample.values()[i];
      double k;
      if (spec.symmetric)
        k = 0.5 * (norm_pdf((y - x) / s) + norm_pdf((y + x) / s)) / s;
      else
        k = norm_pdf((y - x) / s) / s;
      acc += k / fhat[i];
    }
    return acc / n_d - 1.0;
  };

  for (double x : grid.locations) {
    if (!spec.contains_location(x)) continue;
    for (double s : grid.scales) consider(continuous_candidate_value(x, s));
  }

  // point-mass candidates at in-support observations
  if (grid.points_at_observations && spec.scale_contains_zero()) {
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (double x : sample.values()) {
      if (x == prev || !spec.contains_location(x)) continue;
      prev = x;
      consider(point_candidate_value(x));
    }
  }

  // the fit's own components, so weight misallocation is visible
  for (const Atom& a : fit.pi_hat.atoms()) {
    if (!a.is_point()) continue;
    double x = a.loc_value();
    if (spec.symmetric && x < 0.0) continue;
    if (a.scale == 0.0)
      consider(point_candidate_value(x));
    else
      consider(continuous_candidate_value(x, a.scale));
  }

  return sup;
}

}  // namespace npmix
