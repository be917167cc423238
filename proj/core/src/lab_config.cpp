#include "fracvar/lab.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace fracvar::lab {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"kind", "seed", "workers"}},
      {"grid", {"cells", "lo", "hi"}},
      {"density", {"type", "value", "a", "b", "angle", "low", "high", "period", "phase", "axis", "mean", "amplitude", "table"}},
      {"labels", {"values"}},
      {"schedule", {"s", "eps", "k", "policy"}},
      {"perimeter", {"shapes", "measure", "cells"}},
      {"cell", {"nu_angle", "r", "pair", "t", "cells_per_period", "resolution", "stencil"}},
      {"verify", {"samples", "mu_fault"}},
      {"approx", {"delta", "alpha"}},
      {"tolerances", {"relative"}},
      {"output", {"dir", "csv", "svg"}},
  };
  return keys;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(", \t"), boost::token_compress_on);
  std::vector<std::string> out;
  for (auto& p : parts)
    if (!p.empty()) out.push_back(p);
  return out;
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (!is || !(is >> std::ws).eof()) throw ConfigError("bad value for " + key + ": '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& p : split_list(text)) out.push_back(parse_value<T>(key, p));
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

}  // namespace

DensityPtr DensitySpec::build() const {
  if (type == "homogeneous") return std::make_shared<HomogeneousDensity>(value);
  if (type == "ellipse") return std::make_shared<EllipseDensity>(a, b, angle * std::numbers::pi / 180.0);
  if (type == "laminate") return std::make_shared<StepLaminate>(low, high, period, phase, axis);
  if (type == "cosine") return std::make_shared<CosineLaminate>(mean, amplitude, period, axis);
  if (type == "checkerboard") return std::make_shared<Checkerboard>(low, high, period);
  if (type == "table") {
    std::ifstream in(table_path);
    if (!in) throw ConfigError("cannot open density table " + table_path);
    std::vector<double> values;
    int nx = -1, ny = 0;
    std::string line;
    while (std::getline(in, line)) {
      boost::trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto row = parse_list<double>("density.table", line);
      if (nx < 0) nx = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != nx) throw ConfigError("ragged density table " + table_path);
      values.insert(values.end(), row.begin(), row.end());
      ++ny;
    }
    if (nx <= 0) throw ConfigError("empty density table " + table_path);
    // Rows run along y; the file lists the first row (y = 0) first.
    return std::make_shared<TableDensity>(std::move(values), nx, ny, Point{period, period});
  }
  throw ConfigError("unknown density type '" + type + "'");
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kinds{"constants", "verify",   "variation", "quantize", "cell",   "homogenize",
                                           "perimeter", "gamma",    "decompose", "schedule", "lemma55"};
  if (!kinds.count(kind)) throw ConfigError("unknown experiment kind '" + kind + "'");
  if (workers < 1) throw ConfigError("workers must be positive");
  if (cells < 8) throw ConfigError("grid.cells must be at least 8");
  if (!(hi > lo)) throw ConfigError("grid.hi must exceed grid.lo");
  if (labels.size() < 2) throw ConfigError("at least two labels are required");
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (!(labels[i] > labels[i - 1])) throw ConfigError("labels must be strictly increasing");
  for (double s : s_schedule)
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("s values must lie in (0,1)");
  for (double e : eps_schedule)
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
  for (int k : k_schedule)
    if (k < 1) throw ConfigError("k values must be positive");
  if (policy != "default" && policy != "naive") throw ConfigError("schedule.policy must be default or naive");
  for (const auto& s : shapes)
    if (s != "ball" && s != "square" && s != "annulus") throw ConfigError("unknown shape '" + s + "'");
  if (measure != "faces" && measure != "mollified") throw ConfigError("perimeter.measure must be faces or mollified");
  if (perimeter_cells < 16) throw ConfigError("perimeter.cells must be at least 16");
  if (!(r > 0.0)) throw ConfigError("cell.r must be positive");
  if (pair_i < 0 || pair_j < 0 || pair_i >= static_cast<int>(labels.size()) || pair_j >= static_cast<int>(labels.size()) || pair_i == pair_j)
    throw ConfigError("cell.pair must name two distinct labels");
  if (t_schedule.empty()) throw ConfigError("cell.t must not be empty");
  for (double t : t_schedule)
    if (!(t > 0.0)) throw ConfigError("cell.t values must be positive");
  if (cells_per_period < 2 || resolution < 4) throw ConfigError("cell resolution too small");
  if (stencil != 4 && stencil != 8 && stencil != 16) throw ConfigError("cell.stencil must be 4, 8 or 16");
  if (samples < 1) throw ConfigError("verify.samples must be positive");
  if (!(mu_fault > 0.0)) throw ConfigError("verify.mu_fault must be positive");
  if (!(delta > 0.0)) throw ConfigError("approx.delta must be positive");
  for (double a : alpha_list)
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("approx.alpha values must lie in (0,1)");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerances.relative must be nonnegative");
  try {
    (void)density.build();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("density: ") + e.what());
  }
}

ExperimentConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  const auto& known = known_keys();
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, _] : body)
      if (!it->second.count(key)) throw ConfigError("unknown key " + section + "." + key);
  }
  ExperimentConfig c;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return boost::trim_copy(*v);
    return std::nullopt;
  };
  if (auto v = get("experiment.kind")) c.kind = *v;
  if (auto v = get("experiment.seed")) c.seed = parse_value<std::uint64_t>("experiment.seed", *v);
  if (auto v = get("experiment.workers")) c.workers = parse_value<int>("experiment.workers", *v);
  if (auto v = get("grid.cells")) c.cells = parse_value<int>("grid.cells", *v);
  if (auto v = get("grid.lo")) c.lo = parse_value<double>("grid.lo", *v);
  if (auto v = get("grid.hi")) c.hi = parse_value<double>("grid.hi", *v);
  if (auto v = get("density.type")) c.density.type = *v;
  for (auto [key, field] : std::initializer_list<std::pair<const char*, double*>>{{"value", &c.density.value},
                                                                                  {"a", &c.density.a},
                                                                                  {"b", &c.density.b},
                                                                                  {"angle", &c.density.angle},
                                                                                  {"low", &c.density.low},
                                                                                  {"high", &c.density.high},
                                                                                  {"period", &c.density.period},
                                                                                  {"phase", &c.density.phase},
                                                                                  {"mean", &c.density.mean},
                                                                                  {"amplitude", &c.density.amplitude}})
    if (auto v = get(std::string("density.") + key)) *field = parse_value<double>(std::string("density.") + key, *v);
  if (auto v = get("density.axis")) c.density.axis = parse_value<int>("density.axis", *v);
  if (auto v = get("density.table")) c.density.table_path = *v;
  if (auto v = get("labels.values")) c.labels = parse_list<double>("labels.values", *v);
  if (auto v = get("schedule.s")) c.s_schedule = parse_list<double>("schedule.s", *v);
  if (auto v = get("schedule.eps")) c.eps_schedule = parse_list<double>("schedule.eps", *v);
  if (auto v = get("schedule.k")) c.k_schedule = parse_list<int>("schedule.k", *v);
  if (auto v = get("schedule.policy")) c.policy = *v;
  if (auto v = get("perimeter.shapes")) c.shapes = split_list(*v);
  if (auto v = get("perimeter.measure")) c.measure = *v;
  if (auto v = get("perimeter.cells")) c.perimeter_cells = parse_value<int>("perimeter.cells", *v);
  if (auto v = get("cell.nu_angle")) c.nu_angle = parse_value<double>("cell.nu_angle", *v);
  if (auto v = get("cell.r")) c.r = parse_value<double>("cell.r", *v);
  if (auto v = get("cell.pair")) {
    const auto p = parse_list<int>("cell.pair", *v);
    if (p.size() != 2) throw ConfigError("cell.pair needs two label indices");
    c.pair_i = p[0];
    c.pair_j = p[1];
  }
  if (auto v = get("cell.t")) c.t_schedule = parse_list<double>("cell.t", *v);
  if (auto v = get("cell.cells_per_period")) c.cells_per_period = parse_value<int>("cell.cells_per_period", *v);
  if (auto v = get("cell.resolution")) c.resolution = parse_value<int>("cell.resolution", *v);
  if (auto v = get("cell.stencil")) c.stencil = parse_value<int>("cell.stencil", *v);
  if (auto v = get("verify.samples")) c.samples = parse_value<int>("verify.samples", *v);
  if (auto v = get("verify.mu_fault")) c.mu_fault = parse_value<double>("verify.mu_fault", *v);
  if (auto v = get("approx.delta")) c.delta = parse_value<double>("approx.delta", *v);
  if (auto v = get("approx.alpha")) c.alpha_list = parse_list<double>("approx.alpha", *v);
  if (auto v = get("tolerances.relative")) c.tolerance = parse_value<double>("tolerances.relative", *v);
  if (auto v = get("output.dir")) c.out_dir = *v;
  if (auto v = get("output.csv")) c.csv = *v;
  if (auto v = get("output.svg")) c.svg = parse_bool("output.svg", *v);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in);
}

}  // namespace fracvar::lab
