#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "npmix/model.hpp"
#include "npmix/simulate.hpp"
#include "npmix/solver.hpp"

namespace npmix {

using Json = nlohmann::ordered_json;

// All numeric output uses 17 significant digits so doubles round-trip
// bit-exactly; non-finite values are emitted as the strings "inf", "-inf",
// "nan".
std::string fmt_g17(double x);
std::string dump_json17(const Json& j, int indent = 2);

Json to_json(const MixingDistribution& pi);
MixingDistribution mixing_from_json(const Json& j);

Json to_json(const SupportSpec& spec);
SupportSpec support_from_json(const Json& j);
// Accepts a preset name ("real-line", "halfline-binary",
// "symmetric:c=...,b=...") or a path to a JSON file.
SupportSpec support_from_string(const std::string& text);

Json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const Json& j);

Json to_json(const FitResult& fit);

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const Json& j);

std::string experiment_csv(const ExperimentReport& report);
Json experiment_summary_json(const ExperimentReport& report);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// CSV with a header row; returns the named column as doubles.
std::vector<double> read_csv_column(const std::string& path,
                                    const std::string& column);
std::vector<std::pair<double, double>> read_csv_pairs(const std::string& path);

}  // namespace npmix
