#include "npmix/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include "npmix/likelihood.hpp"
#include "npmix/variants.hpp"

namespace npmix {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t root_seed, std::uint64_t n_index,
                         std::uint64_t rep_index) {
  std::uint64_t s = splitmix64(root_seed);
  s = splitmix64(s ^ (n_index + 1));
  return splitmix64(s ^ ((rep_index + 1) << 1));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 6.28318530717958647692 * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Sample sample_mixture(const MixingDistribution& pi, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_mixture: n >= 1 required");
  const auto& atoms = pi.atoms();
  std::vector<double> cum;
  cum.reserve(atoms.size());
  double acc = 0.0;
  for (const Atom& a : atoms) {
    acc += a.weight;
    cum.push_back(acc);
  }
  cum.back() = std::max(cum.back(), 1.0);

  Rng rng(seed);
  std::vector<double> ys;
  ys.reserve(n);
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    std::size_t j =
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    if (j >= atoms.size()) j = atoms.size() - 1;
    const Atom& a = atoms[j];
    double x = a.loc_value();
    if (!a.is_point()) x += std::sqrt(a.tau2()) * rng.normal();
    double y = a.scale > 0.0 ? x + a.scale * rng.normal() : x;
    ys.push_back(y);
  }
  return Sample(std::move(ys));
}

double ks_distance(const CdfEvaluator& cdf_a, const CdfEvaluator& cdf_b,
                   const std::vector<double>& grid) {
  double sup = 0.0;
  for (double y : grid) sup = std::max(sup, std::abs(cdf_a(y) - cdf_b(y)));
  return sup;
}

std::vector<double> ks_grid(double lo, double hi, int n_points,
                            const std::vector<double>& jump_points) {
  std::vector<double> grid;
  grid.reserve(n_points + 2 * jump_points.size());
  for (int i = 0; i < n_points; ++i)
    grid.push_back(lo + (hi - lo) * i / std::max(1, n_points - 1));
  for (double j : jump_points) {
    grid.push_back(j);
    grid.push_back(j - 1e-9);  // left approach point
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> observable_jump_points(const MixingDistribution& pi) {
  std::vector<double> jumps;
  for (const Atom& a : pi.atoms())
    if (a.is_point() && a.scale == 0.0) jumps.push_back(a.loc_value());
  std::sort(jumps.begin(), jumps.end());
  jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
  return jumps;
}

CdfEvaluator cdf_evaluator(const MixingDistribution& pi) {
  // precompute the step part so fits with thousands of point masses can be
  // evaluated on dense grids: binary search over cumulative step weights
  // plus a short loop over the continuous components
  struct Continuous {
    double loc, sd, weight;
  };
  auto steps = std::make_shared<std::vector<std::pair<double, double>>>();
  auto conts = std::make_shared<std::vector<Continuous>>();
  for (const Atom& a : pi.atoms()) {
    if (a.is_point() && a.scale == 0.0)
      steps->emplace_back(a.loc_value(), a.weight);
    else
      conts->push_back({a.loc_value(), std::sqrt(a.tau2() + a.scale * a.scale),
                        a.weight});
  }
  std::sort(steps->begin(), steps->end());
  double acc = 0.0;
  for (auto& [loc, w] : *steps) {
    acc += w;
    w = acc;  // cumulative
  }
  return [steps, conts](double y) {
    double total = 0.0;
    auto it = std::upper_bound(steps->begin(), steps->end(),
                               std::make_pair(y, kPosInf));
    if (it != steps->begin()) total += std::prev(it)->second;
    for (const Continuous& c : *conts)
      total += c.weight * norm_cdf((y - c.loc) / c.sd);
    return std::min(total, 1.0);
  };
}

void ExperimentConfig::validate() const {
  spec.validate();
  fit.validate();
  if (sample_sizes.empty())
    throw InvalidArgument("experiment: no sample sizes");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 1)
      throw InvalidArgument("experiment: sample sizes must be >= 1");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
      throw InvalidArgument("experiment: sample sizes must be increasing");
  }
  if (replications < 1)
    throw InvalidArgument("experiment: replications must be >= 1");
}

namespace {

// Which limit oracle (if any) applies to a spec.
enum class OracleKind { kTruthItself, kHalfline, kSymmetricBand, kIndependent, kNone };

OracleKind classify(const ExperimentConfig& cfg) {
  if (cfg.fit_kind == FitKind::kIndependent) return OracleKind::kIndependent;
  const SupportSpec& s = cfg.spec;
  if (s.loc_is_real_line() && s.scale_contains_zero())
    return OracleKind::kTruthItself;
  if (s.loc_is_neg_halfline() && s.scale_binary && s.scale_lo == 0.0 &&
      s.scale_hi == 1.0)
    return OracleKind::kHalfline;
  if (s.symmetric && std::isfinite(s.loc_hi) && !s.scale_binary &&
      s.loc_hi > s.scale_hi)
    return OracleKind::kSymmetricBand;
  return OracleKind::kNone;
}

CellResult run_cell(const ExperimentConfig& cfg, int n, int n_index, int rep) {
  CellResult cell;
  cell.n = n;
  cell.rep = rep;
  cell.seed = child_seed(cfg.rng_seed, n_index, rep);

  auto t0 = std::chrono::steady_clock::now();
  try {
    Sample sample = sample_mixture(cfg.truth, n, cell.seed);
    FitResult fit = cfg.fit_kind == FitKind::kIndependent
                        ? fit_independent(sample, cfg.spec, cfg.fit)
                        : fit_gmle(sample, cfg.spec, cfg.fit);

    CdfEvaluator truth_cdf = cdf_evaluator(cfg.truth);
    CdfEvaluator fitted_cdf = cdf_evaluator(fit.pi_hat);

    std::vector<double> jumps = observable_jump_points(fit.pi_hat);
    for (double j : observable_jump_points(cfg.truth)) jumps.push_back(j);
    double span_lo = std::min(sample.min(), -1.0) - 6.0;
    double span_hi = std::max(sample.max(), 1.0) + 6.0;
    std::vector<double> grid = ks_grid(span_lo, span_hi, 2001, jumps);

    bool want_truth = cfg.comparison != Comparison::kLimitOracle;
    bool want_limit = cfg.comparison != Comparison::kTruth;
    OracleKind kind = classify(cfg);

    if (want_truth)
      cell.ks_to_truth = ks_distance(fitted_cdf, truth_cdf, grid);

    if (want_limit) {
      switch (kind) {
        case OracleKind::kTruthItself:
          cell.ks_to_limit =
              want_truth ? cell.ks_to_truth
                         : ks_distance(fitted_cdf, truth_cdf, grid);
          break;
        case OracleKind::kHalfline: {
          CdfEvaluator limit = [&](double y) {
            return limit_cdf_halfline(y, truth_cdf);
          };
          cell.ks_to_limit = ks_distance(fitted_cdf, limit, grid);
          break;
        }
        case OracleKind::kIndependent: {
          CdfEvaluator limit = [&](double y) {
            return limit_cdf_independent_general(y, truth_cdf);
          };
          cell.ks_to_limit = ks_distance(fitted_cdf, limit, grid);
          break;
        }
        case OracleKind::kSymmetricBand: {
          // compare location marginals on the interior of the band limit
          LimitMixingSummary lim = limit_mixing_symmetric(
              truth_cdf, cfg.spec.loc_hi, cfg.spec.scale_hi, 401);
          auto marginal_cdf = [&](double x) {
            double mass = 0.0;
            for (const Atom& a : fit.pi_hat.atoms())
              if (a.loc_value() <= x) mass += a.weight;
            return mass;
          };
          double sup = 0.0;
          for (std::size_t i = 0; i < lim.grid.size(); ++i)
            sup = std::max(sup,
                           std::abs(marginal_cdf(lim.grid[i]) - lim.interior_cdf[i]));
          cell.ks_to_limit = sup;
          double band = 0.0;
          for (const Atom& a : fit.pi_hat.atoms())
            if (a.loc_value() > lim.band_lo && a.loc_value() <= lim.band_hi)
              band += a.weight;
          cell.fitted_band_mass = band;
          break;
        }
        case OracleKind::kNone:
          break;
      }
    }
  } catch (const Error& e) {
    cell.status = e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  cell.runtime_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return cell;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  if (workers < 1) throw InvalidArgument("run_experiment: workers >= 1");

  struct CellSpec {
    int n, n_index, rep;
  };
  std::vector<CellSpec> todo;
  for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni)
    for (int rep = 0; rep < cfg.replications; ++rep)
      todo.push_back({cfg.sample_sizes[ni], static_cast<int>(ni), rep});

  ExperimentReport report;
  report.cells.resize(todo.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;
      report.cells[i] = run_cell(cfg, todo[i].n, todo[i].n_index, todo[i].rep);
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

}  // namespace npmix
