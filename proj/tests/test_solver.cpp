#include <doctest.h>

#include <cmath>

#include "npmix/likelihood.hpp"
#include "npmix/simulate.hpp"
#include "npmix/solver.hpp"

using namespace npmix;

TEST_CASE("unrestricted locations give the empirical measure") {
  for (int n : {1, 10, 100}) {
    Sample sample = sample_mixture(MixingDistribution::single_point(0.0, 1.0), n, 99 + n);
    FitResult fit = fit_gmle(sample, SupportSpec::real_line());
    REQUIRE(fit.pi_hat.size() == static_cast<std::size_t>(n));
    for (const Atom& a : fit.pi_hat.atoms()) {
      CHECK(a.scale == 0.0);
      CHECK(a.weight == 1.0 / n);
    }
    CHECK(fit.final_loglik == -static_cast<double>(n) * std::log(static_cast<double>(n)));
    CHECK(fit.converged);
    CHECK(fit.gradient_sup <= 1e-12);
    // evaluated log-likelihood agrees with the analytic value
    double ll = loglik(fit.pi_hat, sample, DominatingMeasure::at_observations(sample));
    CHECK(ll == doctest::Approx(fit.final_loglik).epsilon(1e-12));
  }
}

TEST_CASE("tied observations merge into heavier atoms") {
  Sample sample({1.0, 1.0, 2.0, 3.0});
  FitResult fit = fit_gmle(sample, SupportSpec::real_line());
  REQUIRE(fit.pi_hat.size() == 3);
  CHECK(atomic_mass(1.0, fit.pi_hat) == 0.5);
  double expected = 2.0 * std::log(2.0) - 4.0 * std::log(4.0);
  CHECK(fit.final_loglik == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("closed form on the negative half-line with binary scales") {
  SUBCASE("all observations negative") {
    FitResult fit = closed_form_halfline(Sample({-2.0, -1.0}));
    REQUIRE(fit.pi_hat.size() == 2);
    for (const Atom& a : fit.pi_hat.atoms()) {
      CHECK(a.scale == 0.0);
      CHECK(a.weight == 0.5);
    }
  }
  SUBCASE("all observations positive") {
    FitResult fit = closed_form_halfline(Sample({1.0, 2.0}));
    REQUIRE(fit.pi_hat.size() == 1);
    const Atom& a = fit.pi_hat.atoms()[0];
    CHECK(a.loc_value() == 0.0);
    CHECK(a.scale == 1.0);
    CHECK(a.weight == 1.0);
  }
  SUBCASE("mixed signs follow the displayed formula") {
    Sample sample({-1.0, 0.5, 3.0});
    FitResult fit = closed_form_halfline(sample);
    REQUIRE(fit.pi_hat.size() == 2);
    CHECK(fit.final_loglik ==
          doctest::Approx(loglik(fit.pi_hat, sample,
                                 DominatingMeasure::at_observations(sample)))
              .epsilon(1e-13));
    CHECK(atomic_mass(-1.0, fit.pi_hat) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    bool found = false;
    for (const Atom& a : fit.pi_hat.atoms())
      if (a.scale == 1.0 && a.loc_value() == 0.0) {
        found = true;
        CHECK(a.weight == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
      }
    CHECK(found);
    CHECK(fit.gradient_sup <= 1e-10);
  }
  SUBCASE("dispatched by fit_gmle") {
    Sample sample({-0.5, 0.7, 1.1});
    FitResult via_fit = fit_gmle(sample, SupportSpec::halfline_binary());
    FitResult direct = closed_form_halfline(sample);
    CHECK(via_fit.final_loglik == direct.final_loglik);
    CHECK(via_fit.pi_hat.size() == direct.pi_hat.size());
  }
}

TEST_CASE("dominance certifies the empirical fit against continuous challengers") {
  Sample sample = sample_mixture(MixingDistribution::single_point(0.0, 1.0), 50, 4242);
  FitResult fit = fit_gmle(sample, SupportSpec::real_line());
  std::vector<MixingDistribution> challengers = {
      MixingDistribution::single_point(0.0, 1.0),
      MixingDistribution::single_point(0.0, 2.0),
      MixingDistribution::single_point(1.0, 0.5),
      MixingDistribution({Atom::point(-1.0, 1.0, 0.5), Atom::point(1.0, 1.0, 0.5)}),
      MixingDistribution({Atom::blob(0.0, 1.0, 1.0, 1.0)}),
  };
  for (const auto& challenger : challengers) {
    double d = gmle_dominance(fit.pi_hat, challenger, sample);
    CHECK(d == kPosInf);
  }
}

TEST_CASE("em_step contract") {
  SupportSpec spec = SupportSpec::symmetric_box(1.5, 1.0);

  SUBCASE("rejects the unbounded problem") {
    MixingDistribution pi = MixingDistribution::single_point(0.0, 1.0);
    CHECK_THROWS_AS(em_step(pi, Sample({0.0, 1.0}), SupportSpec::real_line()),
                    UnboundedProblem);
  }
  SUBCASE("requires out-of-support observations") {
    MixingDistribution pi({Atom::point(0.5, 1.0, 0.5), Atom::point(-0.5, 1.0, 0.5)},
                          true);
    CHECK_THROWS_AS(em_step(pi, Sample({0.1, -0.3}), spec), EmptyResponsibility);
  }
  SUBCASE("symmetric single component at the origin is a fixed point") {
    MixingDistribution pi({Atom::point(0.0, 1.0, 1.0)}, true);
    Sample sample({-2.0, 2.0});
    MixingDistribution next = em_step(pi, sample, spec);
    REQUIRE(next.size() == 1);
    CHECK(next.atoms()[0].loc_value() == 0.0);
  }
  SUBCASE("location update matches the hand formula") {
    // one component, two out-of-support observations; work out
    // x = sum (alpha - alpha~) y / sum (alpha + alpha~) by hand
    double x0 = 1.0, s0 = 0.8;
    MixingDistribution pi({Atom::point(x0, s0, 0.3), Atom::point(-x0, s0, 0.3),
                           Atom::point(0.5, 0.0, 0.2), Atom::point(-0.5, 0.0, 0.2)},
                          true);
    Sample sample({-1.9, 0.5, -0.5, 2.2});  // pinned cover +-0.5
    std::vector<double> out = {-1.9, 2.2};

    auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); };
    double num = 0.0, den = 0.0;
    for (double y : out) {
      double a = phi((y - x0) / s0);
      double at = phi((y + x0) / s0);
      double z = a + at;  // single component: responsibilities normalize per obs
      num += (a / z - at / z) * y;
      den += 1.0;
    }
    double expected_x = std::min(num / den, 1.5);

    MixingDistribution next = em_step(pi, sample, spec);
    double got_x = 0.0;
    for (const Atom& a : next.atoms())
      if (a.scale > 0.0 && a.loc_value() > 0.0) got_x = a.loc_value();
    CHECK(got_x == doctest::Approx(expected_x).epsilon(1e-12));
  }
  SUBCASE("loglik never decreases across 100 iterations") {
    Rng rng(31337);
    MixingDistribution truth = MixingDistribution::single_point(0.0, 1.2);
    Sample sample = sample_mixture(truth, 50, 2024);
    DominatingMeasure dom = DominatingMeasure::at_observations(sample, true);

    // random valid symmetric state: pinned + a few continuous pairs
    std::size_t n = sample.size();
    std::vector<Atom> atoms;
    std::vector<double> in_obs;
    double cont_total = 0.0;
    for (double y : sample.values()) {
      if (std::abs(y) <= 1.5) {
        if (y == 0.0)
          atoms.push_back(Atom::point(0.0, 0.0, 1.0 / n));
        else {
          atoms.push_back(Atom::point(y, 0.0, 0.5 / n));
          atoms.push_back(Atom::point(-y, 0.0, 0.5 / n));
        }
      } else {
        cont_total += 1.0 / n;
      }
    }
    REQUIRE(cont_total > 0.0);
    int m = 4;
    for (int j = 0; j < m; ++j) {
      double x = 1.5 * rng.uniform();
      double s = 0.1 + 0.9 * rng.uniform();
      atoms.push_back(Atom::point(x, s, 0.5 * cont_total / m));
      atoms.push_back(Atom::point(-x, s, 0.5 * cont_total / m));
    }
    MixingDistribution state(std::move(atoms), true);

    double ll = loglik(state, sample, dom);
    for (int it = 0; it < 100; ++it) {
      state = em_step(state, sample, spec);
      double next_ll = loglik(state, sample, dom);
      CHECK(next_ll >= ll - 1e-10 * std::abs(ll));
      ll = next_ll;
    }
  }
}

TEST_CASE("symmetric bounded fit: structure and boundary concentration") {
  // truth: point mass at (0, 1); c = z_{0.025}, b = 1
  double c = 1.959964, b = 1.0;
  SupportSpec spec = SupportSpec::symmetric_box(c, b);
  MixingDistribution truth = MixingDistribution::single_point(0.0, 1.0);
  Sample sample = sample_mixture(truth, 2000, 20240815);

  FitConfig cfg;
  cfg.max_em_iters = 3000;
  cfg.loglik_rel_tol = 1e-11;
  FitResult fit = fit_gmle(sample, spec, cfg);

  CHECK(fit.converged);
  CHECK(fit.pi_hat.symmetric());

  // pinned atoms at +-Y_i for in-support observations, weight 1/(2n)
  std::size_t n = sample.size();
  std::size_t n_in = 0;
  for (double y : sample.values())
    if (std::abs(y) <= c) ++n_in;
  double pinned_mass = 0.0, cont_mass = 0.0;
  for (const Atom& a : fit.pi_hat.atoms()) {
    CHECK(a.loc_value() >= -c - 1e-12);
    CHECK(a.loc_value() <= c + 1e-12);
    if (a.scale == 0.0) {
      pinned_mass += a.weight;
    } else {
      CHECK(a.scale <= b + 1e-12);
      cont_mass += a.weight;
      // second-derivative bound from the theorem: x_j > c - b
      CHECK(a.loc_value() != 0.0);
      CHECK(std::abs(a.loc_value()) > c - b);
    }
  }
  CHECK(pinned_mass == doctest::Approx(static_cast<double>(n_in) / n).epsilon(1e-12));
  CHECK(cont_mass == doctest::Approx(1.0 - static_cast<double>(n_in) / n).epsilon(1e-9));

  // certified to first order on the default grid
  CHECK(fit.gradient_sup <= 1e-4);

  // all observations inside: no continuous components at all
  Sample inside({-1.0, -0.25, 0.4, 1.2});
  FitResult fit2 = fit_gmle(inside, spec);
  for (const Atom& a : fit2.pi_hat.atoms()) CHECK(a.scale == 0.0);
  CHECK(fit2.pi_hat.size() == 8);
  for (const Atom& a : fit2.pi_hat.atoms())
    CHECK(a.weight == doctest::Approx(1.0 / 8.0).epsilon(1e-15));

  // an observation exactly at the boundary is treated as in-support
  Sample boundary({-0.5, c});
  FitResult fit3 = fit_gmle(boundary, spec);
  CHECK(atomic_mass(c, fit3.pi_hat) == doctest::Approx(0.25).epsilon(1e-15));
  for (const Atom& a : fit3.pi_hat.atoms()) CHECK(a.scale == 0.0);
}

TEST_CASE("non-symmetric bounded support uses pinned atoms plus plain EM") {
  // truth centered at 0.5; locations restricted to [0, 2]
  MixingDistribution truth = MixingDistribution::single_point(0.5, 1.0);
  Sample sample = sample_mixture(truth, 400, 616);
  SupportSpec spec{0.0, 2.0, 0.0, 1.0, false, false};
  FitConfig cfg;
  cfg.max_em_iters = 1500;
  FitResult fit = fit_gmle(sample, spec, cfg);

  std::size_t n_in = 0;
  for (double y : sample.values())
    if (y >= 0.0 && y <= 2.0) ++n_in;
  REQUIRE(n_in < sample.size());  // both sides populated at this seed

  double pinned = 0.0, cont = 0.0;
  for (const Atom& a : fit.pi_hat.atoms()) {
    CHECK(a.loc_value() >= 0.0);
    CHECK(a.loc_value() <= 2.0);
    if (a.scale == 0.0) {
      CHECK(a.weight == doctest::Approx(1.0 / 400.0).epsilon(1e-12));
      pinned += a.weight;
    } else {
      CHECK(a.scale <= 1.0 + 1e-12);
      cont += a.weight;
    }
  }
  CHECK(pinned == doctest::Approx(n_in / 400.0).epsilon(1e-12));
  CHECK(pinned + cont == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.converged);
}

TEST_CASE("positive scale floor disables pinning entirely") {
  // S = [0.5, 2]: no point masses are admissible, all mass is continuous
  MixingDistribution truth = MixingDistribution::single_point(0.0, 1.0);
  Sample sample = sample_mixture(truth, 1000, 11);
  SupportSpec spec{kNegInf, kPosInf, 0.5, 2.0, false, false};
  FitConfig cfg;
  cfg.max_em_iters = 800;
  FitResult fit = fit_gmle(sample, spec, cfg);

  for (const Atom& a : fit.pi_hat.atoms()) {
    CHECK(a.scale >= 0.5);
    CHECK(a.scale <= 2.0 + 1e-12);
  }
  // the observable fit is close to the truth in KS
  CdfEvaluator fitted = cdf_evaluator(fit.pi_hat);
  double ks = 0.0;
  for (int i = 0; i <= 600; ++i) {
    double y = -4.0 + 8.0 * i / 600.0;
    ks = std::max(ks, std::abs(fitted(y) - mixture_cdf(y, truth)));
  }
  CHECK(ks <= 0.06);
}

TEST_CASE("certify_gmle flags a perturbed fit") {
  Sample sample = sample_mixture(MixingDistribution::single_point(0.0, 1.0), 40, 5150);
  SupportSpec spec = SupportSpec::real_line();
  FitResult fit = fit_gmle(sample, spec);

  // halve one weight and renormalize
  std::vector<Atom> atoms = fit.pi_hat.atoms();
  atoms[0].weight *= 0.5;
  double total = 0.0;
  for (const Atom& a : atoms) total += a.weight;
  for (Atom& a : atoms) a.weight /= total;
  FitResult perturbed = fit;
  perturbed.pi_hat = MixingDistribution(std::move(atoms));

  double sup = certify_gmle(perturbed, sample, spec,
                            default_candidate_grid(sample, spec, {}));
  CHECK(sup > 0.1);
}

TEST_CASE("fit is invariant under sample permutation") {
  std::vector<double> values = {2.3, -2.7, 0.4, -1.1, 3.0, 2.05};
  std::vector<double> shuffled = {3.0, 0.4, -2.7, 2.05, -1.1, 2.3};
  SupportSpec spec = SupportSpec::symmetric_box(2.0, 1.0);
  FitResult a = fit_gmle(Sample(values), spec);
  FitResult b = fit_gmle(Sample(shuffled), spec);
  REQUIRE(a.pi_hat.size() == b.pi_hat.size());
  for (std::size_t i = 0; i < a.pi_hat.size(); ++i) {
    CHECK(a.pi_hat.atoms()[i].loc_value() == b.pi_hat.atoms()[i].loc_value());
    CHECK(a.pi_hat.atoms()[i].weight == b.pi_hat.atoms()[i].weight);
  }
  CHECK(a.final_loglik == b.final_loglik);
}

TEST_CASE("fit_gmle input validation") {
  CHECK_THROWS_AS(fit_gmle(Sample({1.0}), SupportSpec{1.0, -1.0, 0.0, 1.0}),
                  InvalidArgument);
  FitConfig bad;
  bad.loc_grid_size = 1;
  CHECK_THROWS_AS(fit_gmle(Sample({1.0}), SupportSpec::real_line(), bad),
                  InvalidArgument);
}
