#include "npmix/variants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "npmix/likelihood.hpp"

namespace npmix {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double atom_bivariate_density(double y1, double y2, const Atom& a) {
  double d1 = y1 - a.loc_value();
  double d2 = y2 - a.loc_value();
  double s2 = a.scale * a.scale;
  if (a.is_point())
    return std::exp(-0.5 * (d1 * d1 + d2 * d2) / s2) / (kTwoPi * s2);
  // blob: cov = s^2 I + tau2 J
  double t2 = a.tau2();
  double diag = s2 + t2;
  double det = diag * diag - t2 * t2;  // = s^2 (s^2 + 2 tau2)
  double quad = (diag * (d1 * d1 + d2 * d2) - 2.0 * t2 * d1 * d2) / det;
  return std::exp(-0.5 * quad) / (kTwoPi * std::sqrt(det));
}

}  // namespace

PairedSample::PairedSample(std::vector<std::pair<double, double>> p)
    : pairs(std::move(p)) {
  if (pairs.empty()) throw NoObservations("paired sample is empty");
  for (auto& [y1, y2] : pairs)
    if (!std::isfinite(y1) || !std::isfinite(y2))
      throw InvalidArgument("paired sample values must be finite");
}

double censored_loglik(const MixingDistribution& pi, const Sample& sample) {
  std::size_t n_neg = 0;
  double pos_term = 0.0;
  for (double y : sample.values()) {
    if (y <= 0.0) {
      ++n_neg;
      continue;
    }
    double d = mixture_density(y, pi);
    if (d < kDensityFloor) return kNegInf;
    pos_term += std::log(d);
  }
  if (n_neg == 0) return pos_term;
  double p_neg = mixture_cdf(0.0, pi);
  if (p_neg < kDensityFloor) return kNegInf;
  return static_cast<double>(n_neg) * std::log(p_neg) + pos_term;
}

double truncated_loglik(const MixingDistribution& pi, const Sample& sample) {
  for (double y : sample.values())
    if (!(y > 0.0))
      throw InvalidArgument("truncated_loglik: all observations must be > 0");
  double trunc_mass = 1.0 - mixture_cdf(0.0, pi);
  if (trunc_mass < kDensityFloor)
    throw ZeroTruncationMass("truncated_loglik: no mass on (0, inf)");
  double total = 0.0;
  for (double y : sample.values()) {
    double d = mixture_density(y, pi);
    if (d < kDensityFloor) return kNegInf;
    total += std::log(d);
  }
  return total - static_cast<double>(sample.size()) * std::log(trunc_mass);
}

double bivariate_density(double y1, double y2, const MixingDistribution& pi) {
  double total = 0.0;
  for (const Atom& a : pi.atoms()) {
    if (!(a.scale > 0.0))
      throw InvalidArgument("bivariate_density: atom scales must be > 0");
    total += a.weight * atom_bivariate_density(y1, y2, a);
  }
  return flush_tiny(total);
}

FitResult fit_replicated(const PairedSample& sample, const SupportSpec& spec,
                         const FitConfig& cfg) {
  spec.validate();
  cfg.validate();
  std::size_t n = sample.size();
  double n_d = static_cast<double>(n);
  bool mirrored = spec.symmetric;

  std::vector<double> means(n);
  for (std::size_t i = 0; i < n; ++i)
    means[i] = 0.5 * (sample.pairs[i].first + sample.pairs[i].second);
  auto [mn, mx] = std::minmax_element(means.begin(), means.end());
  double lo, hi;
  if (mirrored) {
    lo = 0.0;
    hi = std::min(spec.loc_hi, std::max(std::abs(*mn), std::abs(*mx)));
  } else {
    lo = std::max(spec.loc_lo, *mn);
    hi = std::min(spec.loc_hi, *mx);
    if (lo > hi) std::swap(lo, hi);
  }

  double s_min = std::max(spec.scale_lo, cfg.scale_floor);
  double s_max = std::max(spec.scale_hi, s_min);

  struct Comp {
    double x, s, w;
  };
  std::vector<Comp> comps;
  for (int i = 0; i < cfg.loc_grid_size; ++i) {
    double x = cfg.loc_grid_size == 1
                   ? lo
                   : lo + (hi - lo) * i / (cfg.loc_grid_size - 1);
    for (int j = 0; j < cfg.scale_grid_size; ++j) {
      double s = std::exp(std::log(s_min) + (std::log(s_max) - std::log(s_min)) *
                                                j / (cfg.scale_grid_size - 1));
      comps.push_back({x, s, 0.0});
    }
  }
  for (Comp& c : comps) c.w = 1.0 / static_cast<double>(comps.size());

  // log density of the pair under the component at x (sign = -1 mirrors)
  auto side_logdens = [&](const Comp& c, std::size_t i, double sign) {
    double d1 = sample.pairs[i].first - sign * c.x;
    double d2 = sample.pairs[i].second - sign * c.x;
    return -std::log(kTwoPi) - 2.0 * std::log(c.s) -
           0.5 * (d1 * d1 + d2 * d2) / (c.s * c.s);
  };
  auto comp_logdens = [&](const Comp& c, std::size_t i) {
    double la = side_logdens(c, i, 1.0);
    if (!mirrored) return la;
    double lb = side_logdens(c, i, -1.0);
    double m = std::max(la, lb);
    return m + std::log(std::exp(la - m) + std::exp(lb - m)) + std::log(0.5);
  };
  auto total_loglik = [&]() {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double lse = kNegInf;
      for (const Comp& c : comps) {
        double t = std::log(c.w) + comp_logdens(c, i);
        double m = std::max(lse, t);
        lse = m + std::log(std::exp(lse - m) + std::exp(t - m));
      }
      if (lse == kNegInf) return kNegInf;
      ll += lse;
    }
    return ll;
  };

  double ll = total_loglik();
  int iters = 0;
  bool converged = false;
  for (; iters < cfg.max_em_iters; ++iters) {
    std::size_t m = comps.size();
    std::vector<double> tot(m, 0.0), sx(m, 0.0), sq(m, 0.0);
    std::vector<std::vector<double>> ra(m), rb(m);
    for (std::size_t j = 0; j < m; ++j) {
      ra[j].assign(n, 0.0);
      if (mirrored) rb[j].assign(n, 0.0);
    }
    std::vector<double> la(m), lb(m);
    for (std::size_t i = 0; i < n; ++i) {
      double lse = kNegInf;
      for (std::size_t j = 0; j < m; ++j) {
        double base = std::log(comps[j].w) + (mirrored ? std::log(0.5) : 0.0);
        la[j] = base + side_logdens(comps[j], i, 1.0);
        double mm = std::max(lse, la[j]);
        lse = mm + std::log(std::exp(lse - mm) + std::exp(la[j] - mm));
        if (mirrored) {
          lb[j] = base + side_logdens(comps[j], i, -1.0);
          mm = std::max(lse, lb[j]);
          lse = mm + std::log(std::exp(lse - mm) + std::exp(lb[j] - mm));
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        double a = std::exp(la[j] - lse);
        double b2 = mirrored ? std::exp(lb[j] - lse) : 0.0;
        ra[j][i] = a;
        if (mirrored) rb[j][i] = b2;
        tot[j] += a + b2;
        sx[j] += (a - b2) * means[i];
      }
    }
    for (std::size_t j = 0; j < m; ++j)
      if (tot[j] > 0.0) {
        double x = std::clamp(sx[j] / tot[j], mirrored ? 0.0 : spec.loc_lo,
                              spec.loc_hi);
        if (mirrored && x < 1e-6) x = 0.0;  // consolidate on the mirror boundary
        comps[j].x = x;
      }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double d1 = sample.pairs[i].first - comps[j].x;
        double d2 = sample.pairs[i].second - comps[j].x;
        sq[j] += ra[j][i] * (d1 * d1 + d2 * d2);
        if (mirrored) {
          double e1 = sample.pairs[i].first + comps[j].x;
          double e2 = sample.pairs[i].second + comps[j].x;
          sq[j] += rb[j][i] * (e1 * e1 + e2 * e2);
        }
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (tot[j] > 0.0)
        comps[j].s = std::clamp(std::sqrt(sq[j] / (2.0 * tot[j])), s_min, s_max);
      comps[j].w = tot[j] / n_d;
    }
    std::vector<Comp> kept;
    for (const Comp& c : comps)
      if (c.w >= cfg.atom_weight_floor) kept.push_back(c);
    if (!kept.empty()) comps = std::move(kept);
    // merge components that collapsed onto the same point
    std::sort(comps.begin(), comps.end(),
              [](const Comp& a, const Comp& b2) {
                return a.x != b2.x ? a.x < b2.x : a.s < b2.s;
              });
    std::vector<Comp> merged;
    for (const Comp& c : comps) {
      if (!merged.empty() && std::abs(merged.back().x - c.x) <= 1e-8 &&
          std::abs(merged.back().s - c.s) <= 1e-8) {
        Comp& mg = merged.back();
        if (c.w > mg.w) {
          mg.x = c.x;
          mg.s = c.s;
        }
        mg.w += c.w;
      } else {
        merged.push_back(c);
      }
    }
    comps = std::move(merged);
    std::vector<double> ws;
    for (const Comp& c : comps) ws.push_back(c.w);
    double norm = 1.0 / kahan_sum(ws);
    for (Comp& c : comps) c.w *= norm;

    double new_ll = total_loglik();
    double improvement = new_ll - ll;
    ll = new_ll;
    if (improvement < cfg.loglik_rel_tol * std::max(1.0, std::abs(new_ll))) {
      converged = true;
      ++iters;
      break;
    }
  }

  std::vector<Atom> atoms;
  for (const Comp& c : comps) {
    if (mirrored && c.x != 0.0) {
      atoms.push_back(Atom::point(c.x, c.s, 0.5 * c.w));
      atoms.push_back(Atom::point(-c.x, c.s, 0.5 * c.w));
    } else {
      atoms.push_back(Atom::point(c.x, c.s, c.w));
    }
  }
  FitResult fit;
  fit.pi_hat = MixingDistribution(std::move(atoms), mirrored);
  fit.final_loglik = ll;
  fit.iterations = iters;
  fit.converged = converged;

  // first-order check over the init grid plus the fitted components
  double sup = kNegInf;
  std::vector<double> fr(n);
  for (std::size_t i = 0; i < n; ++i)
    fr[i] =
        bivariate_density(sample.pairs[i].first, sample.pairs[i].second, fit.pi_hat);
  auto consider = [&](double x, double s) {
    Atom cand = Atom::point(x, s, 1.0);
    double acc = 0.0;
    if (mirrored) {
      Atom cand_m = Atom::point(-x, s, 1.0);
      for (std::size_t i = 0; i < n; ++i)
        acc += 0.5 *
               (atom_bivariate_density(sample.pairs[i].first,
                                       sample.pairs[i].second, cand) +
                atom_bivariate_density(sample.pairs[i].first,
                                       sample.pairs[i].second, cand_m)) /
               fr[i];
    } else {
      for (std::size_t i = 0; i < n; ++i)
        acc += atom_bivariate_density(sample.pairs[i].first, sample.pairs[i].second,
                                      cand) /
               fr[i];
    }
    sup = std::max(sup, acc / n_d - 1.0);
  };
  for (int i = 0; i <= 2 * cfg.loc_grid_size; ++i) {
    double x = lo + (hi - lo) * i / (2.0 * cfg.loc_grid_size);
    for (int j = 0; j <= 2 * cfg.scale_grid_size; ++j) {
      double s = std::exp(std::log(s_min) + (std::log(s_max) - std::log(s_min)) *
                                                j / (2.0 * cfg.scale_grid_size));
      consider(x, s);
    }
  }
  for (const Atom& a : fit.pi_hat.atoms())
    if (!mirrored || a.loc_value() >= 0.0) consider(a.loc_value(), a.scale);
  fit.gradient_sup = sup;
  return fit;
}

FitResult fit_independent(const Sample& sample, const SupportSpec& spec,
                          const FitConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (!spec.loc_is_neg_halfline())
    throw InvalidArgument("fit_independent: requires loc = (-inf, 0]");
  if (!spec.scale_contains_zero())
    throw InvalidArgument("fit_independent: requires 0 in the scale set");

  std::size_t n = sample.size();
  double n_d = static_cast<double>(n);
  std::map<double, std::size_t> neg_counts;
  std::vector<double> pos;
  for (double y : sample.values()) {
    if (y <= 0.0)
      neg_counts[y] += 1;
    else
      pos.push_back(y);
  }
  double q_hat = (n_d - static_cast<double>(pos.size())) / n_d;

  // scale part: fixed at scale_hi for binary sets, else EM over a grid
  ScaleMixture h;
  if (pos.empty()) {
    h.scales = {};
    h.converged = true;
  } else if (spec.scale_binary) {
    h.scales = {spec.scale_hi};
    h.weights = {1.0};
    h.converged = true;
  } else {
    double s_min = std::max(spec.scale_lo, cfg.scale_floor);
    std::vector<double> grid;
    int m = std::max(cfg.scale_grid_size * 4, 16);
    for (int j = 0; j < m; ++j)
      grid.push_back(std::exp(std::log(s_min) +
                              (std::log(spec.scale_hi) - std::log(s_min)) * j /
                                  (m - 1)));
    std::vector<double> masses(pos.size(), 1.0 / static_cast<double>(pos.size()));
    h = kl_scale_projection_discrete(pos, masses, spec.scale_hi, grid);
  }
  // drop starved scale weights (multiplicative updates drive them to
  // denormals whose products underflow to zero)
  if (!h.scales.empty()) {
    std::vector<double> scales, weights;
    for (std::size_t k = 0; k < h.scales.size(); ++k)
      if (h.weights[k] >= 1e-8) {
        scales.push_back(h.scales[k]);
        weights.push_back(h.weights[k]);
      }
    double total = kahan_sum(weights);
    for (double& w : weights) w /= total;
    h.scales = std::move(scales);
    h.weights = std::move(weights);
  }

  // Assemble the joint the displayed limit uses: nonpositive observations
  // carry the full scale law (q_hat at 0, the rest on h), while the atom at
  // 0 carries only the continuous scale part.
  std::vector<Atom> atoms;
  double pos_frac = static_cast<double>(pos.size()) / n_d;
  for (const auto& [y, m] : neg_counts) {
    double p_loc = static_cast<double>(m) / n_d;
    if (q_hat > 0.0) atoms.push_back(Atom::point(y, 0.0, p_loc * q_hat));
    for (std::size_t k = 0; k < h.scales.size(); ++k)
      if (h.weights[k] > 0.0)
        atoms.push_back(Atom::point(y, h.scales[k], p_loc * (1.0 - q_hat) * h.weights[k]));
  }
  for (std::size_t k = 0; k < h.scales.size(); ++k)
    if (h.weights[k] > 0.0)
      atoms.push_back(Atom::point(0.0, h.scales[k], pos_frac * h.weights[k]));

  FitResult fit;
  fit.pi_hat = MixingDistribution(std::move(atoms), false);
  fit.final_loglik =
      loglik(fit.pi_hat, sample, DominatingMeasure::at_observations(sample));
  fit.iterations = h.iterations;
  fit.converged = h.converged;

  // certify the scale subproblem: directional derivative of the positive-
  // part objective toward a single scale atom at 0
  double sup = pos.empty() ? 0.0 : kNegInf;
  if (!pos.empty()) {
    std::vector<double> g(pos.size(), 0.0);
    for (std::size_t i = 0; i < pos.size(); ++i)
      for (std::size_t k = 0; k < h.scales.size(); ++k)
        g[i] += h.weights[k] * norm_pdf(pos[i] / h.scales[k]) / h.scales[k];
    double s_min = std::max(spec.scale_lo, cfg.scale_floor);
    int m = std::max(cfg.scale_grid_size * 16, 32);
    for (int j = 0; j < m; ++j) {
      double s = std::exp(std::log(s_min) +
                          (std::log(spec.scale_hi) - std::log(s_min)) * j / (m - 1));
      double acc = 0.0;
      for (std::size_t i = 0; i < pos.size(); ++i)
        acc += (norm_pdf(pos[i] / s) / s) / g[i];
      sup = std::max(sup, acc / static_cast<double>(pos.size()) - 1.0);
    }
  }
  fit.gradient_sup = sup;
  return fit;
}

namespace {

ScaleMixture kl_em(const std::vector<double>& values,
                   const std::vector<double>& masses,
                   const std::vector<double>& grid) {
  ScaleMixture out;
  out.scales = grid;
  out.weights.assign(grid.size(), 1.0 / static_cast<double>(grid.size()));

  // kernel matrix K[k][i] = (1/s_k) phi(v_i / s_k)
  std::vector<std::vector<double>> kernel(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    kernel[k].resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
      kernel[k][i] = norm_pdf(values[i] / grid[k]) / grid[k];
  }

  auto objective = [&](const std::vector<double>& w) {
    double obj = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double g = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k) g += w[k] * kernel[k][i];
      if (g < kDensityFloor) return kNegInf;
      obj += masses[i] * std::log(g);
    }
    return obj;
  };

  double obj = objective(out.weights);
  const int max_iters = 20000;
  std::vector<double> g(values.size());
  for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      g[i] = 0.0;
      for (std::size_t k = 0; k < grid.size(); ++k)
        g[i] += out.weights[k] * kernel[k][i];
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double mult = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i)
        mult += masses[i] * kernel[k][i] / g[i];
      out.weights[k] *= mult;
    }
    double total = kahan_sum(out.weights);
    for (double& w : out.weights) w /= total;

    double new_obj = objective(out.weights);
    double improvement = new_obj - obj;
    obj = new_obj;
    if (improvement < 1e-9 * std::max(1.0, std::abs(new_obj))) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }
  out.objective = obj;
  return out;
}

}  // namespace

ScaleMixture kl_scale_projection_discrete(const std::vector<double>& values,
                                          const std::vector<double>& masses,
                                          double b,
                                          const std::vector<double>& scale_grid) {
  if (scale_grid.empty())
    throw InvalidArgument("kl_scale_projection: empty scale grid");
  for (double s : scale_grid)
    if (!(s > 0.0) || !(s <= b))
      throw InvalidArgument("kl_scale_projection: grid must lie in (0, b]");
  if (values.size() != masses.size() || values.empty())
    throw InvalidArgument("kl_scale_projection: bad discrete sample");
  return kl_em(values, masses, scale_grid);
}

ScaleMixture kl_scale_projection(const CdfEvaluator& g_cdf, double b,
                                 const std::vector<double>& scale_grid) {
  if (scale_grid.empty())
    throw InvalidArgument("kl_scale_projection: empty scale grid");
  for (double s : scale_grid)
    if (!(s > 0.0) || !(s <= b))
      throw InvalidArgument("kl_scale_projection: grid must lie in (0, b]");

  // locate an upper support bound for dG
  double upper = 1.0;
  while (g_cdf(upper) < 1.0 - 1e-12 && upper < 1e6) upper *= 2.0;
  if (upper >= 1e6)
    throw QuadratureFailure("kl_scale_projection: could not bound the support of G");

  // midpoint discretization of dG, refined until the objective of the
  // uniform mixture stabilizes
  auto discretize = [&](int cells, std::vector<double>& values,
                        std::vector<double>& masses) {
    values.clear();
    masses.clear();
    double base = g_cdf(0.0);
    double total = 1.0 - base;
    if (total <= 0.0)
      throw InvalidArgument("kl_scale_projection: G has no mass on (0, inf)");
    double prev = base;
    for (int i = 1; i <= cells; ++i) {
      double x = upper * i / cells;
      double cur = g_cdf(x);
      double mass = (cur - prev) / total;
      if (mass > 0.0) {
        values.push_back(upper * (i - 0.5) / cells);
        masses.push_back(mass);
      }
      prev = cur;
    }
  };

  auto uniform_obj = [&](const std::vector<double>& values,
                         const std::vector<double>& masses) {
    double obj = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double g = 0.0;
      for (double s : scale_grid)
        g += norm_pdf(values[i] / s) / (s * static_cast<double>(scale_grid.size()));
      obj += masses[i] * std::log(g);
    }
    return obj;
  };

  std::vector<double> values, masses;
  double prev_obj = kNegInf;
  int cells = 256;
  for (; cells <= (1 << 20); cells *= 2) {
    discretize(cells, values, masses);
    double obj = uniform_obj(values, masses);
    if (std::abs(obj - prev_obj) < 1e-9 * std::max(1.0, std::abs(obj))) break;
    prev_obj = obj;
  }
  if (cells > (1 << 20))
    throw QuadratureFailure("kl_scale_projection: discretization did not converge");

  return kl_em(values, masses, scale_grid);
}

}  // namespace npmix
