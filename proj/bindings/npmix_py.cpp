#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "npmix/io.hpp"
#include "npmix/likelihood.hpp"
#include "npmix/limits.hpp"
#include "npmix/simulate.hpp"
#include "npmix/solver.hpp"
#include "npmix/variants.hpp"
#include "npmix/wrapping.hpp"

namespace py = pybind11;
using namespace npmix;

namespace {

MixingDistribution mixing_from_json_str(const std::string& text) {
  return mixing_from_json(Json::parse(text));
}

SupportSpec spec_from_json_str(const std::string& text) {
  return support_from_json(Json::parse(text));
}

FitConfig config_from_json_str(const std::string& text) {
  return text.empty() ? FitConfig{} : fit_config_from_json(Json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Generalized maximum likelihood estimation for normal location-scale "
      "mixtures: density/cdf evaluation, GMLE solvers, closed-form "
      "inconsistency limits and seeded simulation.";

  py::register_exception<Error>(m, "NpmixError");

  py::class_<MixingDistribution>(m, "MixingDistribution")
      .def_static("from_json", &mixing_from_json_str, py::arg("text"))
      .def_static(
          "from_atoms",
          [](const std::vector<std::tuple<double, double, double>>& atoms,
             bool symmetric) {
            std::vector<Atom> out;
            out.reserve(atoms.size());
            for (const auto& [x, s, p] : atoms) out.push_back(Atom::point(x, s, p));
            return MixingDistribution(std::move(out), symmetric);
          },
          py::arg("atoms"), py::arg("symmetric") = false,
          "Build from (location, scale, weight) triples of point atoms.")
      .def_property_readonly("symmetric", &MixingDistribution::symmetric)
      .def("to_json", [](const MixingDistribution& pi) {
        return dump_json17(to_json(pi));
      })
      .def("atoms",
           [](const MixingDistribution& pi) {
             std::vector<std::tuple<std::string, double, double, double, double>> out;
             for (const Atom& a : pi.atoms())
               out.emplace_back(a.is_point() ? "point" : "blob", a.loc_value(),
                                a.tau2(), a.scale, a.weight);
             return out;
           },
           "List of (kind, location, tau2, scale, weight) tuples.")
      .def("__len__", &MixingDistribution::size);

  m.def("density", [](const MixingDistribution& pi, double y) {
    return mixture_density(y, pi);
  });
  m.def("cdf", [](const MixingDistribution& pi, double y) {
    return mixture_cdf(y, pi);
  });
  m.def("atomic_mass", [](const MixingDistribution& pi, double y) {
    return atomic_mass(y, pi);
  });
  m.def("posterior_mean", [](const MixingDistribution& pi, double y) {
    return eb_posterior_mean(y, pi);
  });

  m.def(
      "loglik",
      [](const MixingDistribution& pi, const std::vector<double>& values,
         bool atoms_at_observations) {
        Sample sample(values);
        DominatingMeasure dom = atoms_at_observations
                                    ? DominatingMeasure::at_observations(sample)
                                    : DominatingMeasure::lebesgue_only();
        return loglik(pi, sample, dom);
      },
      py::arg("pi"), py::arg("values"), py::arg("atoms_at_observations") = true);

  m.def("dominance",
        [](const MixingDistribution& p_hat, const MixingDistribution& p_tilde,
           const std::vector<double>& values) {
          return gmle_dominance(p_hat, p_tilde, Sample(values));
        });

  m.def(
      "fit_gmle",
      [](const std::vector<double>& values, const std::string& spec_json,
         const std::string& config_json) {
        FitResult fit = fit_gmle(Sample(values), spec_from_json_str(spec_json),
                                 config_from_json_str(config_json));
        return py::make_tuple(fit.pi_hat, fit.final_loglik, fit.iterations,
                              fit.converged, fit.gradient_sup);
      },
      py::arg("values"), py::arg("spec_json"), py::arg("config_json") = "",
      "Returns (pi_hat, final_loglik, iterations, converged, gradient_sup).");

  m.def(
      "fit_independent",
      [](const std::vector<double>& values, const std::string& spec_json,
         const std::string& config_json) {
        FitResult fit =
            fit_independent(Sample(values), spec_from_json_str(spec_json),
                            config_from_json_str(config_json));
        return py::make_tuple(fit.pi_hat, fit.final_loglik, fit.iterations,
                              fit.converged, fit.gradient_sup);
      },
      py::arg("values"), py::arg("spec_json"), py::arg("config_json") = "");

  m.def(
      "fit_replicated",
      [](const std::vector<std::pair<double, double>>& pairs,
         const std::string& spec_json, const std::string& config_json) {
        FitResult fit =
            fit_replicated(PairedSample(pairs), spec_from_json_str(spec_json),
                           config_from_json_str(config_json));
        return py::make_tuple(fit.pi_hat, fit.final_loglik, fit.iterations,
                              fit.converged, fit.gradient_sup);
      },
      py::arg("pairs"), py::arg("spec_json"), py::arg("config_json") = "");

  m.def("solve_eta", [](double c, double b) {
    EtaSolution sol = solve_eta(c, b);
    return py::make_tuple(sol.eta, sol.residual);
  });

  m.def("limit_cdf_halfline", [](double y, const std::function<double(double)>& f) {
    return limit_cdf_halfline(y, f);
  });
  m.def("limit_cdf_independent_gaussian", &limit_cdf_independent_gaussian);
  m.def("limit_cdf_independent_general",
        [](double y, const std::function<double(double)>& f) {
          return limit_cdf_independent_general(y, f);
        });
  m.def("truncnorm_conv_density", &truncnorm_conv_density);

  m.def("wrap_mixing", &wrap_mixing, py::arg("pi_bar"), py::arg("a_bar"),
        py::arg("b_bar"));
  m.def("densities_equal",
        [](const MixingDistribution& a, const MixingDistribution& b, double lo,
           double hi, int n) {
          DensityGap gap = densities_equal(a, b, lo, hi, n);
          return py::make_tuple(gap.max_density_gap, gap.max_cdf_gap);
        });
  m.def("scale_marginal_distance", &scale_marginal_distance);
  m.def("is_ncn_structural", &is_ncn_structural, py::arg("pi"),
        py::arg("conditional") = false);

  m.def("sample_mixture", [](const MixingDistribution& pi, int n, std::uint64_t seed) {
    return sample_mixture(pi, n, seed).values();
  });

  m.def("censored_loglik", [](const MixingDistribution& pi,
                              const std::vector<double>& values) {
    return censored_loglik(pi, Sample(values));
  });
  m.def("truncated_loglik", [](const MixingDistribution& pi,
                               const std::vector<double>& values) {
    return truncated_loglik(pi, Sample(values));
  });
  m.def("bivariate_density", [](double y1, double y2, const MixingDistribution& pi) {
    return bivariate_density(y1, y2, pi);
  });

  m.def(
      "kl_scale_projection",
      [](const std::function<double(double)>& g_cdf, double b,
         const std::vector<double>& grid) {
        ScaleMixture h = kl_scale_projection(g_cdf, b, grid);
        return py::make_tuple(h.scales, h.weights, h.objective, h.converged);
      },
      py::arg("g_cdf"), py::arg("b"), py::arg("scale_grid"));
}
