#include "npmix/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace npmix {

std::string fmt_g17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump_rec(const Json& j, std::string& out, int indent, int depth) {
  std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
  std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + Json(it.key()).dump() + ": ";
        dump_rec(it.value(), out, indent, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_rec(v, out, indent, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      double x = j.get<double>();
      if (std::isfinite(x))
        out += fmt_g17(x);
      else
        out += Json(fmt_g17(x)).dump();  // "inf" etc. as strings
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

double ext_real_from_json(const Json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kPosInf;
    if (s == "-inf") return kNegInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
      return std::stod(s);
    } catch (...) {
    }
  }
  throw ParseError(std::string("expected a number for ") + what);
}

Json ext_real_to_json(double x) {
  if (std::isfinite(x)) return x;
  return fmt_g17(x);
}

double require_number(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field: ") + key);
  return ext_real_from_json(j.at(key), key);
}

}  // namespace

std::string dump_json17(const Json& j, int indent) {
  std::string out;
  dump_rec(j, out, indent, 0);
  out += "\n";
  return out;
}

Json to_json(const MixingDistribution& pi) {
  Json atoms = Json::array();
  for (const Atom& a : pi.atoms()) {
    Json loc;
    if (a.is_point()) {
      loc = Json{{"type", "point"}, {"x", a.loc_value()}};
    } else {
      loc = Json{{"type", "blob"}, {"mu", a.loc_value()}, {"tau2", a.tau2()}};
    }
    atoms.push_back(Json{{"loc", loc}, {"s", a.scale}, {"p", a.weight}});
  }
  return Json{{"atoms", atoms}, {"symmetric", pi.symmetric()}};
}

MixingDistribution mixing_from_json(const Json& j) {
  if (!j.contains("atoms") || !j.at("atoms").is_array())
    throw ParseError("mixing distribution: missing atoms array");
  std::vector<Atom> atoms;
  for (const Json& aj : j.at("atoms")) {
    if (!aj.contains("loc")) throw ParseError("atom: missing loc");
    const Json& loc = aj.at("loc");
    std::string type = loc.value("type", "point");
    double s = require_number(aj, "s");
    double p = require_number(aj, "p");
    if (type == "point") {
      atoms.push_back(Atom::point(require_number(loc, "x"), s, p));
    } else if (type == "blob") {
      atoms.push_back(
          Atom::blob(require_number(loc, "mu"), require_number(loc, "tau2"), s, p));
    } else {
      throw ParseError("atom: unknown location type '" + type + "'");
    }
  }
  bool symmetric = j.value("symmetric", false);
  try {
    return MixingDistribution(std::move(atoms), symmetric);
  } catch (const InvalidDistribution& e) {
    throw ParseError(std::string("invalid mixing distribution: ") + e.what());
  }
}

Json to_json(const SupportSpec& spec) {
  return Json{{"loc_lo", ext_real_to_json(spec.loc_lo)},
              {"loc_hi", ext_real_to_json(spec.loc_hi)},
              {"scale_lo", spec.scale_lo},
              {"scale_hi", spec.scale_hi},
              {"scale_kind", spec.scale_binary ? "binary" : "interval"},
              {"symmetric", spec.symmetric}};
}

SupportSpec support_from_json(const Json& j) {
  SupportSpec spec;
  spec.loc_lo = j.contains("loc_lo") ? ext_real_from_json(j.at("loc_lo"), "loc_lo")
                                     : kNegInf;
  spec.loc_hi = j.contains("loc_hi") ? ext_real_from_json(j.at("loc_hi"), "loc_hi")
                                     : kPosInf;
  spec.scale_lo = require_number(j, "scale_lo");
  spec.scale_hi = require_number(j, "scale_hi");
  spec.scale_binary = j.value("scale_kind", "interval") == "binary";
  spec.symmetric = j.value("symmetric", false);
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid support spec: ") + e.what());
  }
  return spec;
}

SupportSpec support_from_string(const std::string& text) {
  if (text == "real-line") return SupportSpec::real_line();
  if (text == "halfline-binary") return SupportSpec::halfline_binary();
  if (text.rfind("symmetric:", 0) == 0) {
    double c = 0.0, b = 0.0;
    if (std::sscanf(text.c_str(), "symmetric:c=%lf,b=%lf", &c, &b) == 2)
      return SupportSpec::symmetric_box(c, b);
    throw ParseError("bad symmetric spec, expected symmetric:c=<c>,b=<b>");
  }
  return support_from_json(read_json_file(text));
}

Json to_json(const FitConfig& cfg) {
  return Json{{"loc_grid_size", cfg.loc_grid_size},
              {"scale_grid_size", cfg.scale_grid_size},
              {"max_em_iters", cfg.max_em_iters},
              {"loglik_rel_tol", cfg.loglik_rel_tol},
              {"atom_weight_floor", cfg.atom_weight_floor},
              {"scale_floor", cfg.scale_floor},
              {"rng_seed", cfg.rng_seed}};
}

FitConfig fit_config_from_json(const Json& j) {
  FitConfig cfg;
  cfg.loc_grid_size = j.value("loc_grid_size", cfg.loc_grid_size);
  cfg.scale_grid_size = j.value("scale_grid_size", cfg.scale_grid_size);
  cfg.max_em_iters = j.value("max_em_iters", cfg.max_em_iters);
  cfg.loglik_rel_tol = j.value("loglik_rel_tol", cfg.loglik_rel_tol);
  cfg.atom_weight_floor = j.value("atom_weight_floor", cfg.atom_weight_floor);
  cfg.scale_floor = j.value("scale_floor", cfg.scale_floor);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid fit config: ") + e.what());
  }
  return cfg;
}

Json to_json(const FitResult& fit) {
  return Json{{"pi_hat", to_json(fit.pi_hat)},
              {"final_loglik", fit.final_loglik},
              {"iterations", fit.iterations},
              {"converged", fit.converged},
              {"gradient_sup", fit.gradient_sup}};
}

namespace {

Comparison comparison_from_string(const std::string& s) {
  if (s == "truth") return Comparison::kTruth;
  if (s == "limit") return Comparison::kLimitOracle;
  if (s == "both") return Comparison::kBoth;
  throw ParseError("comparison must be truth|limit|both");
}

std::string comparison_to_string(Comparison c) {
  switch (c) {
    case Comparison::kTruth:
      return "truth";
    case Comparison::kLimitOracle:
      return "limit";
    default:
      return "both";
  }
}

}  // namespace

Json to_json(const ExperimentConfig& cfg) {
  return Json{{"truth", to_json(cfg.truth)},
              {"spec", to_json(cfg.spec)},
              {"sample_sizes", cfg.sample_sizes},
              {"replications", cfg.replications},
              {"rng_seed", cfg.rng_seed},
              {"comparison", comparison_to_string(cfg.comparison)},
              {"fit_kind",
               cfg.fit_kind == FitKind::kIndependent ? "independent" : "gmle"},
              {"fit", to_json(cfg.fit)}};
}

ExperimentConfig experiment_from_json(const Json& j) {
  ExperimentConfig cfg;
  if (!j.contains("truth")) throw ParseError("experiment: missing truth");
  if (!j.contains("spec")) throw ParseError("experiment: missing spec");
  cfg.truth = mixing_from_json(j.at("truth"));
  cfg.spec = support_from_json(j.at("spec"));
  if (!j.contains("sample_sizes"))
    throw ParseError("experiment: missing sample_sizes");
  cfg.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
  cfg.replications = j.value("replications", 1);
  cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
  cfg.comparison = comparison_from_string(j.value("comparison", "both"));
  std::string kind = j.value("fit_kind", "gmle");
  if (kind == "independent")
    cfg.fit_kind = FitKind::kIndependent;
  else if (kind == "gmle")
    cfg.fit_kind = FitKind::kGmle;
  else
    throw ParseError("experiment: fit_kind must be gmle|independent");
  if (j.contains("fit")) cfg.fit = fit_config_from_json(j.at("fit"));
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid experiment config: ") + e.what());
  }
  return cfg;
}

std::string experiment_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "n,rep,seed,ks_to_truth,ks_to_limit,fitted_band_mass,runtime_ms,status\n";
  for (const CellResult& c : report.cells) {
    out << c.n << ',' << c.rep << ',' << c.seed << ',';
    if (c.ks_to_truth) out << fmt_g17(*c.ks_to_truth);
    out << ',';
    if (c.ks_to_limit) out << fmt_g17(*c.ks_to_limit);
    out << ',';
    if (c.fitted_band_mass) out << fmt_g17(*c.fitted_band_mass);
    out << ',' << c.runtime_ms << ',' << c.status << '\n';
  }
  return out.str();
}

namespace {

Json quartiles(std::vector<double> xs) {
  if (xs.empty()) return Json::object();
  std::sort(xs.begin(), xs.end());
  auto at = [&](double q) {
    double pos = q * (xs.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(i);
    return i + 1 < xs.size() ? xs[i] * (1.0 - frac) + xs[i + 1] * frac : xs[i];
  };
  return Json{{"q1", at(0.25)}, {"median", at(0.5)}, {"q3", at(0.75)}};
}

}  // namespace

Json experiment_summary_json(const ExperimentReport& report) {
  std::vector<int> ns;
  for (const CellResult& c : report.cells)
    if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);

  Json per_n = Json::array();
  for (int n : ns) {
    std::vector<double> kt, kl, bm;
    int ok = 0, total = 0;
    for (const CellResult& c : report.cells) {
      if (c.n != n) continue;
      ++total;
      if (c.status != "ok") continue;
      ++ok;
      if (c.ks_to_truth) kt.push_back(*c.ks_to_truth);
      if (c.ks_to_limit) kl.push_back(*c.ks_to_limit);
      if (c.fitted_band_mass) bm.push_back(*c.fitted_band_mass);
    }
    Json entry{{"n", n}, {"cells", total}, {"ok", ok}};
    if (!kt.empty()) entry["ks_to_truth"] = quartiles(kt);
    if (!kl.empty()) entry["ks_to_limit"] = quartiles(kl);
    if (!bm.empty()) entry["fitted_band_mass"] = quartiles(bm);
    per_n.push_back(entry);
  }
  return Json{{"per_n", per_n}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << text;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (...) {
    std::ostringstream msg;
    msg << path << ":" << line_no << ": not a number: '" << s << "'";
    throw ParseError(msg.str());
  }
}

}  // namespace

std::vector<double> read_csv_column(const std::string& path,
                                    const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  auto header = split_csv_line(line);
  std::size_t idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == column) idx = i;
  if (idx == header.size())
    throw ParseError(path + ": no column named '" + column + "'");

  std::vector<double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() <= idx) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": too few fields";
      throw ParseError(msg.str());
    }
    values.push_back(parse_double(trim(fields[idx]), path, line_no));
  }
  return values;
}

std::vector<std::pair<double, double>> read_csv_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  auto header = split_csv_line(line);
  std::size_t i1 = header.size(), i2 = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == "y1") i1 = i;
    if (trim(header[i]) == "y2") i2 = i;
  }
  if (i1 == header.size() || i2 == header.size())
    throw ParseError(path + ": header must name columns y1,y2");

  std::vector<std::pair<double, double>> pairs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() <= std::max(i1, i2)) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": too few fields";
      throw ParseError(msg.str());
    }
    pairs.emplace_back(parse_double(trim(fields[i1]), path, line_no),
                       parse_double(trim(fields[i2]), path, line_no));
  }
  return pairs;
}

}  // namespace npmix
