#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "npmix/limits.hpp"
#include "npmix/model.hpp"
#include "npmix/solver.hpp"

namespace npmix {

std::uint64_t splitmix64(std::uint64_t x);

// Child seed for cell (n_index, rep_index); collision-free in practice and
// independent of evaluation order.
std::uint64_t child_seed(std::uint64_t root_seed, std::uint64_t n_index,
                         std::uint64_t rep_index);

// Deterministic generator: the mt19937_64 stream is fixed by the standard,
// and the uniform/normal transforms are hand-rolled here so draws do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // (0, 1]
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// n iid draws Y = X + S eps from the mixing distribution; sorted.
Sample sample_mixture(const MixingDistribution& pi, int n, std::uint64_t seed);

// Sup distance over the grid.  For step cdfs the grid must include the jump
// points and points just below them; see ks_grid.
double ks_distance(const CdfEvaluator& cdf_a, const CdfEvaluator& cdf_b,
                   const std::vector<double>& grid);

// Uniform grid plus jump points and their left approach points.
std::vector<double> ks_grid(double lo, double hi, int n_points,
                            const std::vector<double>& jump_points);

// Locations of the atoms (s = 0 point masses) of the induced observable law.
std::vector<double> observable_jump_points(const MixingDistribution& pi);

CdfEvaluator cdf_evaluator(const MixingDistribution& pi);

enum class Comparison { kTruth, kLimitOracle, kBoth };
enum class FitKind { kGmle, kIndependent };

struct ExperimentConfig {
  MixingDistribution truth;
  SupportSpec spec;
  std::vector<int> sample_sizes;
  int replications = 1;
  std::uint64_t rng_seed = 0;
  Comparison comparison = Comparison::kBoth;
  FitKind fit_kind = FitKind::kGmle;
  FitConfig fit;

  void validate() const;
};

struct CellResult {
  int n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::optional<double> ks_to_truth;
  std::optional<double> ks_to_limit;
  std::optional<double> fitted_band_mass;  // symmetric bounded specs only
  std::int64_t runtime_ms = 0;             // wall clock; excluded from
                                           // determinism comparisons
  std::string status = "ok";
};

struct ExperimentReport {
  std::vector<CellResult> cells;
};

// Runs all (n, replication) cells; deterministic up to runtime_ms for any
// worker count (cells are written into their slots by index).
ExperimentReport run_experiment(const ExperimentConfig& cfg, int workers = 1);

}  // namespace npmix
