#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "npmix/io.hpp"
#include "npmix/likelihood.hpp"
#include "npmix/limits.hpp"
#include "npmix/simulate.hpp"
#include "npmix/solver.hpp"
#include "npmix/variants.hpp"
#include "npmix/wrapping.hpp"

namespace {

using namespace npmix;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNotConverged = 2;

struct GridSpec {
  double lo = -4.0, hi = 4.0;
  int n = 101;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &g.lo, &g.hi, &g.n) != 3 || g.n < 2 ||
      !(g.lo < g.hi))
    throw ParseError("bad grid, expected lo:hi:n with lo < hi and n >= 2");
  return g;
}

FitConfig load_fit_config(const std::string& path) {
  if (path.empty()) return FitConfig{};
  return fit_config_from_json(read_json_file(path));
}

struct FitOverrides {
  int max_iters = -1;
  double tol = -1.0;
  std::int64_t seed = -1;
};

int cmd_fit(const std::string& data_path, const std::string& spec_text,
            const std::string& config_path, const std::string& out_path,
            bool replicated, bool independent, const FitOverrides& over) {
  FitConfig cfg = load_fit_config(config_path);
  if (over.max_iters >= 0) cfg.max_em_iters = over.max_iters;
  if (over.tol > 0.0) cfg.loglik_rel_tol = over.tol;
  if (over.seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(over.seed);
  FitResult fit;
  if (replicated) {
    auto pairs = read_csv_pairs(data_path);
    if (pairs.empty()) throw NoObservations("no observations");
    SupportSpec spec = spec_text.empty() ? SupportSpec{kNegInf, kPosInf, 0.0, 2.0}
                                         : support_from_string(spec_text);
    fit = fit_replicated(PairedSample(std::move(pairs)), spec, cfg);
  } else {
    auto values = read_csv_column(data_path, "y");
    if (values.empty()) throw NoObservations("no observations");
    SupportSpec spec = support_from_string(spec_text);
    Sample sample(std::move(values));
    fit = independent ? fit_independent(sample, spec, cfg)
                      : fit_gmle(sample, spec, cfg);
  }
  write_text_file(out_path, dump_json17(to_json(fit)));
  return fit.converged ? kExitOk : kExitNotConverged;
}

CdfEvaluator truth_from_params(const Json& params) {
  if (params.contains("truth") && params.at("truth").is_string()) {
    std::string name = params.at("truth").get<std::string>();
    if (name == "gauss")
      return [](double y) { return norm_cdf(y); };
    // otherwise a path to a mixing-distribution JSON
    MixingDistribution pi = mixing_from_json(read_json_file(name));
    return cdf_evaluator(pi);
  }
  if (params.contains("truth_pi"))
    return cdf_evaluator(mixing_from_json(params.at("truth_pi")));
  return [](double y) { return norm_cdf(y); };
}

int cmd_limits(const std::string& case_name, const std::string& params_text,
               const std::string& grid_text, const std::string& out_path) {
  Json params = Json::object();
  if (!params_text.empty()) {
    try {
      params = Json::parse(params_text);
    } catch (const nlohmann::json::parse_error&) {
      params = read_json_file(params_text);
    }
  }

  if (case_name == "eta") {
    double c = params.value("c", 0.0);
    double b = params.value("b", 0.0);
    EtaSolution sol = solve_eta(c, b);
    std::printf("%.12f\n", sol.eta);
    if (!out_path.empty()) {
      std::ostringstream csv;
      csv << "c,b,eta,residual\n"
          << fmt_g17(sol.c) << ',' << fmt_g17(sol.b) << ',' << fmt_g17(sol.eta)
          << ',' << fmt_g17(sol.residual) << '\n';
      write_text_file(out_path, csv.str());
    }
    return kExitOk;
  }

  GridSpec grid = parse_grid(grid_text);
  CdfEvaluator truth = truth_from_params(params);
  CdfEvaluator limit;
  if (case_name == "halfline") {
    limit = [truth](double y) { return limit_cdf_halfline(y, truth); };
  } else if (case_name == "independent") {
    bool gauss = !params.contains("truth") ||
                 (params.at("truth").is_string() &&
                  params.at("truth").get<std::string>() == "gauss");
    if (gauss)
      limit = [](double y) { return limit_cdf_independent_gaussian(y); };
    else
      limit = [truth](double y) { return limit_cdf_independent_general(y, truth); };
  } else if (case_name == "symmetric") {
    double c = params.value("c", 0.0);
    double b = params.value("b", 0.0);
    LimitMixingSummary lim = limit_mixing_symmetric(truth, c, b, grid.n);
    std::printf("eta %.12f\nband_mass_per_side %.12f\n", lim.eta,
                lim.band_mass_per_side);
    std::ostringstream csv;
    csv << "x,limit_marginal_cdf\n";
    for (std::size_t i = 0; i < lim.grid.size(); ++i)
      csv << fmt_g17(lim.grid[i]) << ',' << fmt_g17(lim.interior_cdf[i]) << '\n';
    write_text_file(out_path, csv.str());
    return kExitOk;
  } else {
    throw ParseError("unknown case '" + case_name +
                     "', expected eta|halfline|symmetric|independent");
  }

  std::ostringstream csv;
  csv << "y,limit_cdf,truth_cdf,gap\n";
  for (int i = 0; i < grid.n; ++i) {
    double y = grid.lo + (grid.hi - grid.lo) * i / (grid.n - 1);
    double lv = limit(y), tv = truth(y);
    csv << fmt_g17(y) << ',' << fmt_g17(lv) << ',' << fmt_g17(tv) << ','
        << fmt_g17(lv - tv) << '\n';
  }
  write_text_file(out_path, csv.str());
  return kExitOk;
}

int cmd_wrap_demo(const std::string& pi_path, double a_bar, double b_bar,
                  const std::string& grid_text, const std::string& out_path) {
  MixingDistribution pi_bar = mixing_from_json(read_json_file(pi_path));
  MixingDistribution wrapped = wrap_mixing(pi_bar, a_bar, b_bar);
  GridSpec grid = parse_grid(grid_text);
  DensityGap gap = densities_equal(pi_bar, wrapped, grid.lo, grid.hi, grid.n);
  Json out{{"pi_bar", to_json(pi_bar)},
           {"pi_wrapped", to_json(wrapped)},
           {"max_density_gap", gap.max_density_gap},
           {"max_cdf_gap", gap.max_cdf_gap},
           {"scale_marginal_distance", scale_marginal_distance(pi_bar, wrapped)}};
  write_text_file(out_path, dump_json17(out));
  return kExitOk;
}

int cmd_simulate(const std::string& pi_path, int n, std::uint64_t seed,
                 const std::string& out_path) {
  MixingDistribution pi = mixing_from_json(read_json_file(pi_path));
  Sample sample = sample_mixture(pi, n, seed);
  std::ostringstream csv;
  csv << "y\n";
  for (double y : sample.values()) csv << fmt_g17(y) << '\n';
  write_text_file(out_path, csv.str());
  return kExitOk;
}

int cmd_eb(const std::string& pi_path, const std::string& grid_text,
           const std::string& out_path) {
  MixingDistribution pi = mixing_from_json(read_json_file(pi_path));
  GridSpec grid = parse_grid(grid_text);
  std::ostringstream csv;
  csv << "y,posterior_mean,density,atomic_mass\n";
  for (int i = 0; i < grid.n; ++i) {
    double y = grid.lo + (grid.hi - grid.lo) * i / (grid.n - 1);
    double dens = mixture_density(y, pi);
    double am = atomic_mass(y, pi);
    csv << fmt_g17(y) << ',';
    try {
      csv << fmt_g17(eb_posterior_mean(y, pi));
    } catch (const UndefinedPosterior&) {
      csv << "nan";
    }
    csv << ',' << fmt_g17(dens) << ',' << fmt_g17(am) << '\n';
  }
  write_text_file(out_path, csv.str());
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_csv,
                   const std::string& out_json, int workers) {
  ExperimentConfig cfg = experiment_from_json(read_json_file(config_path));
  ExperimentReport report = run_experiment(cfg, workers);
  if (!out_csv.empty()) write_text_file(out_csv, experiment_csv(report));
  if (!out_json.empty())
    write_text_file(out_json, dump_json17(experiment_summary_json(report)));
  for (const CellResult& cell : report.cells)
    if (cell.status != "ok") return kExitNotConverged;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "npmix: generalized maximum likelihood estimation for normal "
      "location-scale mixtures, with closed-form limit oracles and "
      "simulation drivers"};
  app.require_subcommand(1);

  // fit
  std::string fit_data, fit_spec, fit_config, fit_out;
  bool fit_replicated_flag = false, fit_independent_flag = false;
  auto* fit = app.add_subcommand("fit", "fit the GMLE of a mixing distribution");
  fit->add_option("--data", fit_data, "CSV with column y (y1,y2 with --replicated)")
      ->required();
  fit->add_option("--spec", fit_spec,
                  "support spec: JSON file or preset (real-line, "
                  "halfline-binary, symmetric:c=..,b=..)");
  fit->add_option("--config", fit_config, "fit config JSON");
  fit->add_option("--out", fit_out, "output FitResult JSON")->required();
  fit->add_flag("--replicated", fit_replicated_flag, "two observations per latent");
  fit->add_flag("--independent", fit_independent_flag,
                "independence-constrained product fit");
  FitOverrides fit_over;
  fit->add_option("--max-iters", fit_over.max_iters,
                  "EM iteration cap (overrides --config)");
  fit->add_option("--tol", fit_over.tol,
                  "relative log-likelihood tolerance (overrides --config)");
  fit->add_option("--seed", fit_over.seed, "rng seed (overrides --config)");

  // limits
  std::string lim_case, lim_params, lim_grid = "-4:4:101", lim_out;
  auto* limits = app.add_subcommand("limits", "closed-form limit oracle tables");
  limits->add_option("--case", lim_case, "eta|halfline|symmetric|independent")
      ->required();
  limits->add_option("--params", lim_params, "inline JSON or a JSON file path");
  limits->add_option("--grid", lim_grid, "lo:hi:n");
  limits->add_option("--out", lim_out, "output CSV path");

  // wrap-demo
  std::string wrap_pi, wrap_grid = "-12:12:1000", wrap_out;
  double wrap_a = 0.0, wrap_b = 0.0;
  auto* wrap = app.add_subcommand(
      "wrap-demo", "exhibit two mixing distributions with one observable law");
  wrap->add_option("--pi", wrap_pi, "mixing distribution JSON")->required();
  wrap->add_option("--a-bar", wrap_a, "lower scale bound")->required();
  wrap->add_option("--b-bar", wrap_b, "upper scale bound")->required();
  wrap->add_option("--grid", wrap_grid, "density comparison grid lo:hi:n");
  wrap->add_option("--out", wrap_out, "output JSON")->required();

  // simulate
  std::string sim_pi, sim_out;
  int sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "draw a sample from a mixing distribution");
  sim->add_option("--pi", sim_pi, "mixing distribution JSON")->required();
  sim->add_option("--n", sim_n, "sample size")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "rng seed");
  sim->add_option("--out", sim_out, "output CSV")->required();

  // eb
  std::string eb_pi, eb_grid = "-4:4:101", eb_out;
  auto* eb = app.add_subcommand("eb", "empirical Bayes posterior mean table");
  eb->add_option("--pi", eb_pi, "mixing distribution JSON (fitted or specified)")
      ->required();
  eb->add_option("--grid", eb_grid, "lo:hi:n");
  eb->add_option("--out", eb_out, "output CSV")->required();

  // experiment
  std::string exp_config, exp_csv, exp_json;
  int exp_workers = 1;
  auto* exp = app.add_subcommand("experiment",
                                 "seeded consistency/inconsistency sweeps");
  exp->add_option("--config", exp_config, "ExperimentConfig JSON")->required();
  exp->add_option("--out-csv", exp_csv, "per-cell CSV output");
  exp->add_option("--out-json", exp_json, "summary JSON output");
  exp->add_option("--workers", exp_workers, "worker threads (output-invariant)")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      if (!fit_replicated_flag && fit_spec.empty())
        throw ParseError("fit: --spec is required");
      return cmd_fit(fit_data, fit_spec, fit_config, fit_out, fit_replicated_flag,
                     fit_independent_flag, fit_over);
    }
    if (limits->parsed()) {
      if (lim_case != "eta" && lim_out.empty())
        throw ParseError("limits: --out is required for table cases");
      return cmd_limits(lim_case, lim_params, lim_grid, lim_out);
    }
    if (wrap->parsed())
      return cmd_wrap_demo(wrap_pi, wrap_a, wrap_b, wrap_grid, wrap_out);
    if (sim->parsed()) return cmd_simulate(sim_pi, sim_n, sim_seed, sim_out);
    if (eb->parsed()) return cmd_eb(eb_pi, eb_grid, eb_out);
    if (exp->parsed())
      return cmd_experiment(exp_config, exp_csv, exp_json, exp_workers);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
