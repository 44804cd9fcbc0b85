#pragma once

#include <cstdint>

#include "npmix/model.hpp"

namespace npmix {

struct FitConfig {
  int loc_grid_size = 16;
  int scale_grid_size = 8;
  int max_em_iters = 2000;
  double loglik_rel_tol = 1e-9;
  double atom_weight_floor = 1e-10;  // components below are pruned
  double scale_floor = 1e-6;         // lower clamp for continuous scales
  std::uint64_t rng_seed = 0;        // reserved; the solver is deterministic

  void validate() const;
};

struct FitResult {
  MixingDistribution pi_hat;
  double final_loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  // Max directional derivative of the log-likelihood toward candidate atoms;
  // <= tol certifies approximate GMLE-ness on the grid.
  double gradient_sup = 0.0;
};

// Candidate atoms for the first-order optimality check.
struct CandidateGrid {
  std::vector<double> locations;  // continuous-component candidates
  std::vector<double> scales;     // each > 0
  // also try point-mass candidates at in-support observations (s = 0)
  bool points_at_observations = true;
};

// Compute the GMLE of the mixing distribution under the support
// restriction.  Dispatches to the closed forms (unrestricted locations;
// negative half-line with binary scales) or to EM over an adaptive atom
// set with point masses pinned at in-support observations.
FitResult fit_gmle(const Sample& sample, const SupportSpec& spec,
                   const FitConfig& cfg = {});

// Closed form for loc = (-inf, 0], S = {0, 1}: point masses at the
// nonpositive observations plus a standard normal component at 0 carrying
// the positive fraction.
FitResult closed_form_halfline(const Sample& sample);

// One EM iteration over the continuous components of `pi` (point atoms
// with s = 0 are pinned and not touched), restricted to out-of-support
// observations.  Mirrored responsibilities under a symmetric spec.
// Throws EmptyResponsibility when there is nothing to update against.
MixingDistribution em_step(const MixingDistribution& pi, const Sample& sample,
                           const SupportSpec& spec, const FitConfig& cfg = {});

CandidateGrid default_candidate_grid(const Sample& sample,
                                     const SupportSpec& spec,
                                     const FitConfig& cfg = {});

// sup over grid atoms of the directional derivative
// (1/n) sum_i k_theta(Y_i) / f_hat(Y_i) - 1 under the mixed-measure
// convention (a continuous candidate contributes 0 against an atom).
double certify_gmle(const FitResult& fit, const Sample& sample,
                    const SupportSpec& spec, const CandidateGrid& grid);

}  // namespace npmix
