#include <doctest.h>

#include <cmath>
#include <set>

#include "npmix/likelihood.hpp"
#include "npmix/simulate.hpp"

using namespace npmix;

namespace {

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("sample_mixture determinism and edge cases") {
  MixingDistribution degenerate({Atom::point(5.0, 0.0, 1.0)});
  Sample s = sample_mixture(degenerate, 10, 1);
  for (double v : s.values()) CHECK(v == 5.0);

  Sample a = sample_mixture(MixingDistribution::single_point(0.0, 1.0), 100, 7);
  Sample b = sample_mixture(MixingDistribution::single_point(0.0, 1.0), 100, 7);
  CHECK(a.values() == b.values());
  Sample c = sample_mixture(MixingDistribution::single_point(0.0, 1.0), 100, 8);
  CHECK(a.values() != c.values());
}

TEST_CASE("sample_mixture moments at seed 42") {
  Sample s = sample_mixture(MixingDistribution::single_point(0.0, 1.0), 100000, 42);
  double mean = 0.0;
  for (double v : s.values()) mean += v;
  mean /= s.size();
  double var = 0.0;
  for (double v : s.values()) var += (v - mean) * (v - mean);
  var /= (s.size() - 1);
  CHECK(mean > -0.02);
  CHECK(mean < 0.02);
  CHECK(var > 0.98);
  CHECK(var < 1.02);
}

TEST_CASE("sample from a symmetric mixture mirrors in distribution") {
  MixingDistribution sym({Atom::point(1.0, 0.5, 0.5), Atom::point(-1.0, 0.5, 0.5)},
                         true);
  Sample s = sample_mixture(sym, 10000, 99);
  // two-sample KS between the sample and its mirror image
  std::vector<double> mirrored;
  for (double v : s.values()) mirrored.push_back(-v);
  Sample m(std::move(mirrored));
  double ks = 0.0;
  std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    double y = s.values()[i];
    double fm = std::lower_bound(m.values().begin(), m.values().end(), y) -
                m.values().begin();
    double upper =
        std::upper_bound(m.values().begin(), m.values().end(), y) - m.values().begin();
    double fa = static_cast<double>(i + 1) / n;
    ks = std::max(ks, std::max(std::abs(fa - fm / n), std::abs(fa - upper / n)));
  }
  // two-sample Kolmogorov 99.9% band: 1.95 sqrt(2/n)
  CHECK(ks <= 1.95 * std::sqrt(2.0 / n));
}

TEST_CASE("blob atoms sample with the extra location variance") {
  MixingDistribution blob({Atom::blob(0.0, 3.0, 1.0, 1.0)});
  Sample s = sample_mixture(blob, 100000, 31);
  double var = 0.0;
  for (double v : s.values()) var += v * v;
  var /= s.size();
  CHECK(var > 3.9);
  CHECK(var < 4.1);
}

TEST_CASE("ks_distance") {
  CdfEvaluator gauss = [](double y) { return Phi(y); };
  std::vector<double> grid = ks_grid(-8.0, 8.0, 2001, {});
  CHECK(ks_distance(gauss, gauss, grid) == 0.0);

  // scan oracle for Phi vs Phi(./2); the sup is near |y| = 1.3596
  CdfEvaluator wide = [](double y) { return Phi(y / 2.0); };
  double scan = 0.0;
  for (int i = 0; i <= 1000000; ++i) {
    double y = -8.0 + 16.0 * i / 1000000.0;
    scan = std::max(scan, std::abs(Phi(y) - Phi(y / 2.0)));
  }
  CHECK(scan == doctest::Approx(0.16133).epsilon(1e-4));
  CHECK(ks_distance(gauss, wide, grid) == doctest::Approx(scan).epsilon(1e-4));

  // step cdfs need their jump points in the grid
  MixingDistribution emp({Atom::point(0.0, 0.0, 0.5), Atom::point(1.0, 0.0, 0.5)});
  CdfEvaluator step = cdf_evaluator(emp);
  std::vector<double> with_jumps = ks_grid(-2.0, 2.0, 11, observable_jump_points(emp));
  CHECK(ks_distance(step, gauss, with_jumps) >=
        std::abs(1.0 - Phi(1.0)) - 1e-9);
}

TEST_CASE("cdf_evaluator matches the direct evaluation path") {
  Rng rng(3113);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Atom> atoms;
    int n_atoms = 1 + static_cast<int>(rng.uniform() * 5);
    std::vector<double> ws;
    double total = 0.0;
    for (int i = 0; i < n_atoms; ++i) {
      ws.push_back(0.1 + rng.uniform());
      total += ws.back();
    }
    for (int i = 0; i < n_atoms; ++i) {
      double x = 4.0 * (rng.uniform() - 0.5);
      double kind = rng.uniform();
      if (kind < 0.4)
        atoms.push_back(Atom::point(x, 0.0, ws[i] / total));
      else if (kind < 0.7)
        atoms.push_back(Atom::point(x, 0.3 + rng.uniform(), ws[i] / total));
      else
        atoms.push_back(Atom::blob(x, 0.5, 0.3 + rng.uniform(), ws[i] / total));
    }
    MixingDistribution pi(std::move(atoms));
    CdfEvaluator fast = cdf_evaluator(pi);
    for (int i = 0; i <= 200; ++i) {
      double y = -6.0 + 12.0 * i / 200.0;
      CHECK(std::abs(fast(y) - mixture_cdf(y, pi)) < 1e-14);
    }
    for (double j : observable_jump_points(pi)) {
      CHECK(std::abs(fast(j) - mixture_cdf(j, pi)) < 1e-14);
      CHECK(std::abs(fast(j - 1e-9) - mixture_cdf(j - 1e-9, pi)) < 1e-14);
    }
  }
}

TEST_CASE("run_experiment with the independence-constrained fit") {
  SupportSpec spec;
  spec.loc_lo = kNegInf;
  spec.loc_hi = 0.0;
  spec.scale_lo = 0.0;
  spec.scale_hi = 2.0;
  ExperimentConfig cfg{MixingDistribution::single_point(0.0, 1.0),
                       spec,
                       {400},
                       2,
                       57,
                       Comparison::kLimitOracle,
                       FitKind::kIndependent,
                       FitConfig{}};
  ExperimentReport report = run_experiment(cfg);
  for (const CellResult& cell : report.cells) {
    REQUIRE(cell.status == "ok");
    REQUIRE(cell.ks_to_limit.has_value());
    CHECK(*cell.ks_to_limit < 0.12);
    CHECK(!cell.ks_to_truth.has_value());  // comparison = limit only
  }
}

TEST_CASE("empirical cdf ks against its own generator stays in the Kolmogorov band") {
  MixingDistribution truth = MixingDistribution::single_point(0.0, 1.0);
  CdfEvaluator truth_cdf = cdf_evaluator(truth);
  int n = 1000, reps = 200;
  std::vector<double> stats;
  for (int r = 0; r < reps; ++r) {
    Sample s = sample_mixture(truth, n, child_seed(5, 0, r));
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      double fa = truth_cdf(s.values()[i]);
      ks = std::max(ks, std::max(std::abs((i + 1.0) / n - fa), std::abs(i * 1.0 / n - fa)));
    }
    stats.push_back(ks * std::sqrt(static_cast<double>(n)));
  }
  std::sort(stats.begin(), stats.end());
  double median = stats[reps / 2];
  // Kolmogorov distribution: median ~ 0.828, 95th percentile ~ 1.36
  CHECK(median > 0.7);
  CHECK(median < 0.95);
}

TEST_CASE("child seeds do not collide") {
  std::set<std::uint64_t> seen;
  for (int ni = 0; ni < 8; ++ni)
    for (int rep = 0; rep < 128; ++rep)
      CHECK(seen.insert(child_seed(123456789, ni, rep)).second);
  // distinct roots decorrelate
  CHECK(child_seed(1, 0, 0) != child_seed(2, 0, 0));
}

TEST_CASE("run_experiment: consistent regime shrinks at the root-n rate") {
  ExperimentConfig cfg{MixingDistribution::single_point(0.0, 1.0),
                       SupportSpec::real_line(),
                       {100, 1000},
                       8,
                       2024,
                       Comparison::kBoth,
                       FitKind::kGmle,
                       FitConfig{}};
  ExperimentReport report = run_experiment(cfg);
  REQUIRE(report.cells.size() == 16);
  std::vector<double> ks_small, ks_large;
  for (const CellResult& c : report.cells) {
    REQUIRE(c.status == "ok");
    REQUIRE(c.ks_to_truth.has_value());
    (c.n == 100 ? ks_small : ks_large).push_back(*c.ks_to_truth);
  }
  std::sort(ks_small.begin(), ks_small.end());
  std::sort(ks_large.begin(), ks_large.end());
  double med_small = ks_small[ks_small.size() / 2];
  double med_large = ks_large[ks_large.size() / 2];
  CHECK(med_large < med_small);
  CHECK(med_large < 2.0 * 0.83 / std::sqrt(1000.0));
}

TEST_CASE("run_experiment: halfline regime plateaus at the oracle") {
  ExperimentConfig cfg{MixingDistribution::single_point(0.0, 1.0),
                       SupportSpec::halfline_binary(),
                       {500, 2000},
                       6,
                       77,
                       Comparison::kBoth,
                       FitKind::kGmle,
                       FitConfig{}};
  ExperimentReport report = run_experiment(cfg);
  for (const CellResult& c : report.cells) {
    REQUIRE(c.status == "ok");
    CHECK(*c.ks_to_limit < 0.08);
    CHECK(*c.ks_to_truth > 0.125);  // half the predicted 0.25 gap at 0
  }
}

TEST_CASE("run_experiment: symmetric bounded regime reports band masses") {
  double c = 1.959964, b = 1.0;
  FitConfig fit_cfg;
  fit_cfg.max_em_iters = 3000;
  ExperimentConfig cfg{MixingDistribution::single_point(0.0, 1.0),
                       SupportSpec::symmetric_box(c, b),
                       {2000},
                       2,
                       19,
                       Comparison::kBoth,
                       FitKind::kGmle,
                       fit_cfg};
  ExperimentReport report = run_experiment(cfg);
  LimitMixingSummary lim = limit_mixing_symmetric(
      cdf_evaluator(cfg.truth), c, b, 201);
  for (const CellResult& cell : report.cells) {
    REQUIRE(cell.status == "ok");
    REQUIRE(cell.fitted_band_mass.has_value());
    CHECK(std::abs(*cell.fitted_band_mass - lim.band_mass_per_side) < 0.03);
    REQUIRE(cell.ks_to_limit.has_value());
    CHECK(*cell.ks_to_limit < 0.1);
  }
}

TEST_CASE("run_experiment is bit-identical across worker counts") {
  ExperimentConfig cfg{MixingDistribution::single_point(0.0, 1.0),
                       SupportSpec::halfline_binary(),
                       {200, 400},
                       6,
                       31415,
                       Comparison::kBoth,
                       FitKind::kGmle,
                       FitConfig{}};
  ExperimentReport r1 = run_experiment(cfg, 1);
  ExperimentReport r4 = run_experiment(cfg, 4);
  ExperimentReport r8 = run_experiment(cfg, 8);
  REQUIRE(r1.cells.size() == r4.cells.size());
  REQUIRE(r1.cells.size() == r8.cells.size());
  for (std::size_t i = 0; i < r1.cells.size(); ++i) {
    for (const ExperimentReport* r : {&r4, &r8}) {
      CHECK(r1.cells[i].n == r->cells[i].n);
      CHECK(r1.cells[i].rep == r->cells[i].rep);
      CHECK(r1.cells[i].seed == r->cells[i].seed);
      CHECK(r1.cells[i].ks_to_truth == r->cells[i].ks_to_truth);
      CHECK(r1.cells[i].ks_to_limit == r->cells[i].ks_to_limit);
      CHECK(r1.cells[i].fitted_band_mass == r->cells[i].fitted_band_mass);
      CHECK(r1.cells[i].status == r->cells[i].status);
    }
  }
}

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg{MixingDistribution::single_point(0.0, 1.0),
                       SupportSpec::real_line(),
                       {100, 100},
                       1,
                       0,
                       Comparison::kBoth,
                       FitKind::kGmle,
                       FitConfig{}};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);  // sizes must increase
  cfg.sample_sizes = {100};
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
