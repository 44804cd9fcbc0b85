#include <doctest.h>

#include <cmath>

#include "npmix/likelihood.hpp"
#include "npmix/simulate.hpp"

using namespace npmix;

namespace {

// scalar oracles, independent of the library evaluation path
double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

MixingDistribution random_mixture(Rng& rng, bool symmetric) {
  int n_atoms = 1 + static_cast<int>(rng.uniform() * 4);
  std::vector<Atom> atoms;
  std::vector<double> ws;
  for (int i = 0; i < n_atoms; ++i) ws.push_back(0.05 + rng.uniform());
  double total = 0.0;
  for (double w : ws) total += w;
  for (int i = 0; i < n_atoms; ++i) {
    double w = ws[i] / total;
    double x = 3.0 * (rng.uniform() - 0.5);
    double s = 0.2 + 2.0 * rng.uniform();
    if (symmetric) {
      atoms.push_back(Atom::point(x, s, 0.5 * w));
      atoms.push_back(Atom::point(-x, s, 0.5 * w));
    } else if (rng.uniform() < 0.3) {
      atoms.push_back(Atom::blob(x, 0.5 + rng.uniform(), s, w));
    } else {
      atoms.push_back(Atom::point(x, s, w));
    }
  }
  return MixingDistribution(std::move(atoms), symmetric);
}

}  // namespace

TEST_CASE("mixture_density matches hand-computed values") {
  CHECK(mixture_density(0.0, MixingDistribution::single_point(0.0, 1.0)) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-14));

  MixingDistribution blob({Atom::blob(0.0, 1.0, 1.0, 1.0)});
  CHECK(mixture_density(0.0, blob) ==
        doctest::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-14));

  MixingDistribution two({Atom::point(-1.0, 0.5, 0.5), Atom::point(1.0, 2.0, 0.5)});
  double expected = 0.5 * (1.0 / 0.5) * phi(4.0) + 0.5 * (1.0 / 2.0) * phi(0.0);
  CHECK(mixture_density(1.0, two) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("point atoms with s = 0 live on the counting part") {
  MixingDistribution pi({Atom::point(2.0, 0.0, 1.0)});
  CHECK(mixture_density(2.0, pi) == 0.0);
  CHECK(atomic_mass(2.0, pi) == 1.0);
  CHECK(atomic_mass(2.0, MixingDistribution::single_point(0.0, 1.0)) == 0.0);

  MixingDistribution sym({Atom::point(0.0, 0.0, 0.4), Atom::point(1.0, 0.0, 0.3),
                          Atom::point(-1.0, 0.0, 0.3)},
                         true);
  CHECK(atomic_mass(0.0, sym) == 0.4);
}

TEST_CASE("mixture_cdf follows the step convention") {
  CHECK(mixture_cdf(0.0, MixingDistribution::single_point(0.0, 1.0)) == 0.5);
  CHECK(mixture_cdf(100.0, MixingDistribution::single_point(0.0, 1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));

  MixingDistribution mixed({Atom::point(0.0, 0.0, 0.5), Atom::point(0.0, 1.0, 0.5)});
  CHECK(mixture_cdf(0.0, mixed) == 0.75);       // right-continuous step at 0
  CHECK(mixture_cdf(-1e-12, mixed) < 0.25);     // just below the step
}

TEST_CASE("eb_posterior_mean") {
  MixingDistribution degenerate = MixingDistribution::single_point(3.0, 1.0);
  CHECK(eb_posterior_mean(-5.0, degenerate) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(eb_posterior_mean(17.0, degenerate) == doctest::Approx(3.0).epsilon(1e-12));

  MixingDistribution sym({Atom::point(1.0, 1.0, 0.5), Atom::point(-1.0, 1.0, 0.5)},
                         true);
  CHECK(eb_posterior_mean(0.0, sym) == 0.0);  // exact by pairwise evaluation

  // scalar oracle: (phi(0) - phi(2)) / (phi(0) + phi(2))
  double expected = (phi(0.0) - phi(2.0)) / (phi(0.0) + phi(2.0));
  CHECK(eb_posterior_mean(1.0, sym) == doctest::Approx(expected).epsilon(1e-13));

  // atomic mass dominates the continuous part
  MixingDistribution withatom({Atom::point(0.5, 0.0, 0.5), Atom::point(0.0, 1.0, 0.5)});
  CHECK(eb_posterior_mean(0.5, withatom) == 0.5);

  CHECK_THROWS_AS(eb_posterior_mean(1.0, MixingDistribution({Atom::point(0.0, 0.0, 1.0)})),
                  UndefinedPosterior);

  // blob posterior mean under normal-normal conjugacy
  MixingDistribution blob({Atom::blob(0.0, 1.0, 1.0, 1.0)});
  CHECK(eb_posterior_mean(2.0, blob) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loglik under the mixed-measure convention") {
  SUBCASE("empirical measure attains -n log n") {
    Sample sample({-0.3, 0.7, 1.9});
    std::vector<Atom> atoms;
    for (double y : sample.values()) atoms.push_back(Atom::point(y, 0.0, 1.0 / 3.0));
    MixingDistribution emp(std::move(atoms));
    double ll = loglik(emp, sample, DominatingMeasure::at_observations(sample));
    CHECK(ll == doctest::Approx(-3.0 * std::log(3.0)).epsilon(1e-14));
  }
  SUBCASE("pure continuous model against Lebesgue") {
    Sample sample({-1.0, 0.5, 2.0});
    MixingDistribution pi = MixingDistribution::single_point(0.0, 1.0);
    double expected = std::log(phi(-1.0)) + std::log(phi(0.5)) + std::log(phi(2.0));
    CHECK(loglik(pi, sample, DominatingMeasure::lebesgue_only()) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("two-atom model on a three-point sample, scalar oracle") {
    Sample sample({-1.0, 0.0, 2.0});
    MixingDistribution pi({Atom::point(-1.0, 1.0, 0.4), Atom::point(1.0, 0.5, 0.6)});
    double expected = 0.0;
    for (double y : sample.values()) {
      double d = 0.4 * phi(y + 1.0) + 0.6 * (1.0 / 0.5) * phi((y - 1.0) / 0.5);
      expected += std::log(d);
    }
    CHECK(loglik(pi, sample, DominatingMeasure::at_observations(sample)) ==
          doctest::Approx(expected).epsilon(1e-13));
  }
  SUBCASE("zero contribution propagates to -inf") {
    Sample sample({5.0});
    MixingDistribution pi({Atom::point(0.0, 0.0, 1.0)});
    CHECK(loglik(pi, sample, DominatingMeasure::at_observations(sample)) == kNegInf);
  }
  SUBCASE("atom masks the continuous density at an observation") {
    Sample sample({0.0});
    MixingDistribution pi({Atom::point(0.0, 0.0, 0.5), Atom::point(0.0, 1.0, 0.5)});
    double ll = loglik(pi, sample, DominatingMeasure::at_observations(sample));
    CHECK(ll == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  }
  SUBCASE("dominating-measure atoms must cover the observations") {
    Sample sample({-1.0, 2.0});
    MixingDistribution pi = MixingDistribution::single_point(0.0, 1.0);
    DominatingMeasure partial{{-1.0}, true};
    CHECK_THROWS_AS(loglik(pi, sample, partial), InvalidArgument);
  }
  SUBCASE("invariant under atom reordering and duplicate merging") {
    Sample sample({-0.5, 0.4, 1.2});
    MixingDistribution a({Atom::point(1.0, 0.7, 0.25), Atom::point(-1.0, 1.3, 0.5),
                          Atom::point(1.0, 0.7, 0.25)});
    MixingDistribution b({Atom::point(-1.0, 1.3, 0.5), Atom::point(1.0, 0.7, 0.5)});
    DominatingMeasure dom = DominatingMeasure::at_observations(sample);
    CHECK(loglik(a, sample, dom) == loglik(b, sample, dom));
  }
}

TEST_CASE("gmle_dominance") {
  Sample sample({-1.0, 1.0});
  MixingDistribution narrow = MixingDistribution::single_point(0.0, 1.0);
  MixingDistribution wide = MixingDistribution::single_point(0.0, 2.0);

  SUBCASE("identical candidates tie") {
    CHECK(gmle_dominance(narrow, narrow, sample) == 0.0);
  }
  SUBCASE("atoms crush densities") {
    MixingDistribution emp({Atom::point(-1.0, 0.0, 0.5), Atom::point(1.0, 0.0, 0.5)});
    CHECK(gmle_dominance(emp, narrow, sample) == kPosInf);
    CHECK(gmle_dominance(narrow, emp, sample) == kNegInf);
  }
  SUBCASE("scalar oracle for two continuous candidates") {
    double expected = 2.0 * (std::log(phi(1.0)) - std::log(0.5 * phi(0.5)));
    CHECK(gmle_dominance(narrow, wide, sample) ==
          doctest::Approx(expected).epsilon(1e-13));
    CHECK(gmle_dominance(narrow, wide, sample) ==
          -gmle_dominance(wide, narrow, sample));
  }
  SUBCASE("indeterminate when both vanish") {
    MixingDistribution a({Atom::point(50.0, 0.0, 1.0)});
    MixingDistribution b({Atom::point(-50.0, 0.0, 1.0)});
    CHECK_THROWS_AS(gmle_dominance(a, b, Sample({0.0})), IndeterminateDominance);
  }
  SUBCASE("antisymmetry over random continuous pairs") {
    Rng rng(606);
    for (int trial = 0; trial < 20; ++trial) {
      MixingDistribution a = random_mixture(rng, false);
      MixingDistribution b = random_mixture(rng, false);
      std::vector<double> ys;
      for (int i = 0; i < 9; ++i) ys.push_back(3.0 * rng.normal());
      Sample s(std::move(ys));
      double ab = gmle_dominance(a, b, s);
      double ba = gmle_dominance(b, a, s);
      CHECK(std::isfinite(ab));
      CHECK(ab == -ba);
    }
  }
}

TEST_CASE("cdf monotonicity, normalization and density consistency") {
  Rng rng(20240501);
  for (int trial = 0; trial < 25; ++trial) {
    MixingDistribution pi = random_mixture(rng, trial % 2 == 0);
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
      double y = -12.0 + 24.0 * i / 200.0;
      double c = mixture_cdf(y, pi);
      CHECK(c >= prev - 1e-15);
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      prev = c;
    }
    CHECK(mixture_cdf(-60.0, pi) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mixture_cdf(60.0, pi) == doctest::Approx(1.0).epsilon(1e-12));

    // central differences at continuity points (all scales > 0 here)
    for (double y : {-2.3, -0.4, 0.9, 3.1}) {
      double h = 1e-5;
      double fd = (mixture_cdf(y + h, pi) - mixture_cdf(y - h, pi)) / (2.0 * h);
      CHECK(std::abs(fd - mixture_density(y, pi)) < 1e-6);
    }
  }
}

TEST_CASE("symmetric evaluation is exactly symmetric") {
  Rng rng(7777);
  for (int trial = 0; trial < 10; ++trial) {
    MixingDistribution pi = random_mixture(rng, true);
    for (double y : {0.1, 0.75, 1.6, 2.9, 4.2}) {
      CHECK(mixture_density(y, pi) == mixture_density(-y, pi));
    }
    CHECK(eb_posterior_mean(0.0, pi) == 0.0);
  }
}

TEST_CASE("variance additivity of blob atoms") {
  // NormalBlob(mu, tau2) at scale s induces the same density as
  // PointMass(mu) at scale sqrt(tau2 + s^2)
  MixingDistribution blob({Atom::blob(0.7, 1.3, 0.9, 1.0)});
  MixingDistribution point(
      {Atom::point(0.7, std::sqrt(1.3 + 0.81), 1.0)});
  for (double y : {-3.0, -1.0, 0.0, 0.7, 2.0, 5.0}) {
    CHECK(std::abs(mixture_density(y, blob) - mixture_density(y, point)) < 1e-14);
  }
}
