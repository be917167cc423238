#include "fracvar/lab.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace fracvar::lab;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  int workers = 0;
  long long seed = -1;
  std::string density;
  int cells = 0;
  int samples = 0;
  double mu_fault = 0.0;
  double nu = std::nan("");
  double r = 0.0;
  std::vector<int> pair;
  std::vector<double> t_list;
  int cells_per_period = 0;
  int resolution = 0;
  std::vector<double> s_list;
  std::vector<int> k_list;
  std::vector<double> eps_list;
  std::string policy;
  std::vector<std::string> shapes;
  double delta = 0.0;
  std::vector<double> alpha_list;
  bool no_svg = false;
};

ExperimentConfig resolve(const std::string& kind, const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  c.kind = kind;
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.workers > 0) c.workers = o.workers;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.density.empty()) c.density.type = o.density;
  if (o.cells > 0) {
    c.cells = o.cells;
    c.perimeter_cells = o.cells;
  }
  if (o.samples > 0) c.samples = o.samples;
  if (o.mu_fault > 0.0) c.mu_fault = o.mu_fault;
  if (!std::isnan(o.nu)) c.nu_angle = o.nu;
  if (o.r > 0.0) c.r = o.r;
  if (!o.pair.empty()) {
    if (o.pair.size() != 2) throw ConfigError("--pair needs two label indices");
    c.pair_i = o.pair[0];
    c.pair_j = o.pair[1];
  }
  if (!o.t_list.empty()) c.t_schedule = o.t_list;
  if (o.cells_per_period > 0) c.cells_per_period = o.cells_per_period;
  if (o.resolution > 0) c.resolution = o.resolution;
  if (!o.s_list.empty()) c.s_schedule = o.s_list;
  if (!o.k_list.empty()) c.k_schedule = o.k_list;
  if (!o.eps_list.empty()) c.eps_schedule = o.eps_list;
  if (!o.policy.empty()) c.policy = o.policy;
  if (!o.shapes.empty()) c.shapes = o.shapes;
  if (o.delta > 0.0) c.delta = o.delta;
  if (!o.alpha_list.empty()) c.alpha_list = o.alpha_list;
  if (o.no_svg) c.svg = false;
  c.validate();
  return c;
}

const std::map<std::string, std::string>& plot_axis() {
  static const std::map<std::string, std::string> axis{
      {"perimeter", "s"}, {"variation", "s"}, {"gamma", "k"}, {"homogenize", "t"}, {"schedule", "k"}, {"quantize", "eps"}, {"constants", "s"}};
  return axis;
}

void print_table(const ConvergenceTable& t) {
  std::printf("%s: %s\n", t.experiment.c_str(), t.passed ? "pass" : "fail");
  for (const auto& r : t.rows) {
    std::printf("  %3d %-28s", r.index, r.label.c_str());
    for (std::size_t i = 0; i < r.params.size() && i < t.param_names.size(); ++i)
      if (!std::isnan(r.params[i])) std::printf(" %s=%.6g", t.param_names[i].c_str(), r.params[i]);
    std::printf("  measured=%.8g reference=%.8g rel=%.3g\n", r.measured, r.reference, r.relative_error);
  }
  for (const auto& f : t.flags) std::printf("  flag: %s\n", f.c_str());
}

int emit(const ExperimentConfig& cfg, const ConvergenceTable& t) {
  fs::create_directories(cfg.out_dir);
  const std::string stem = cfg.csv.empty() ? cfg.kind : fs::path(cfg.csv).stem().string();
  const fs::path csv = fs::path(cfg.out_dir) / (stem + ".csv");
  std::ofstream os(csv);
  if (!os) throw std::runtime_error("cannot write " + csv.string());
  write_csv(os, t);
  if (cfg.svg) {
    const auto it = plot_axis().find(cfg.kind);
    std::ofstream svg(fs::path(cfg.out_dir) / (stem + ".svg"));
    write_svg(svg, t, it == plot_axis().end() ? "index" : it->second);
  }
  print_table(t);
  std::printf("wrote %s\n", csv.string().c_str());
  return t.passed ? 0 : 1;
}

int run(const std::string& kind, const Overrides& o) {
  const ExperimentConfig cfg = resolve(kind, o);
  if (kind == "verify") {
    const VerificationReport rep = run_verification_suite(cfg);
    for (const auto& c : rep.checks)
      std::printf("%-20s %s worst=%.3g tol=%.3g seed=%llu %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL", c.worst, c.tolerance,
                  static_cast<unsigned long long>(c.worst_seed), c.detail.c_str());
    return emit(cfg, rep.table());
  }
  static const std::map<std::string, ConvergenceTable (*)(const ExperimentConfig&)> runners{
      {"constants", run_constants}, {"variation", run_variation}, {"quantize", run_quantize},   {"cell", run_cell},
      {"homogenize", run_homogenize}, {"perimeter", run_perimeter_sweep}, {"gamma", run_gamma_sweep}, {"decompose", run_decompose},
      {"schedule", run_schedule},   {"lemma55", run_mollification_bound}};
  return emit(cfg, runners.at(kind)(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional variation and partition-energy laboratory"};
  app.require_subcommand(1);
  Overrides o;
  struct Command {
    const char* name;
    const char* kind;
    const char* help;
  };
  const std::vector<Command> commands{
      {"constants", "constants", "normalizing constants and their limits"},
      {"verify-operators", "verify", "duality, Leibniz, estimate and cross-path checks on random fields"},
      {"variation", "variation", "fractional variation of test shapes"},
      {"quantize", "quantize", "coarea quantization of a smooth field onto the labels"},
      {"cell", "cell", "one cell-problem value"},
      {"homogenize", "homogenize", "cell values over a period schedule"},
      {"gamma-sweep", "gamma", "partition energies along an (s, eps) schedule"},
      {"perimeter-sweep", "perimeter", "fractional perimeters as s approaches 1"},
      {"decompose", "decompose", "partition-of-unity decomposition of a periodic density"},
      {"schedule", "schedule", "compatibility schedule and its diagnostic"},
      {"lemma55", "lemma55", "mollification error against its four-term bound"}};
  std::map<CLI::App*, std::string> kinds;
  for (const auto& [name, kind, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    kinds[sub] = kind;
    sub->add_option("--config", o.config, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--workers", o.workers, "worker threads");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--density", o.density, "density type");
    sub->add_option("--cells", o.cells, "grid cells per axis");
    sub->add_flag("--no-svg", o.no_svg, "skip the SVG plot");
    if (kind == "verify") {
      sub->add_option("--samples", o.samples, "random fields per s");
      sub->add_option("--mu-fault", o.mu_fault, "multiply mu_s in the gradient (fault injection)");
    }
    if (kind == "cell" || kind == "homogenize" || kind == "gamma") {
      sub->add_option("--nu", o.nu, "interface normal angle in degrees");
      sub->add_option("--pair", o.pair, "label indices I,J")->delimiter(',');
      sub->add_option("--resolution", o.resolution, "cells per cube side");
    }
    if (kind == "cell") sub->add_option("--r", o.r, "cube side");
    if (kind == "homogenize" || kind == "gamma") {
      sub->add_option("--t-list", o.t_list, "periods per cube side")->delimiter(',');
      sub->add_option("--cells-per-period", o.cells_per_period, "cells per period");
    }
    if (kind == "gamma" || kind == "perimeter" || kind == "variation" || kind == "constants" || kind == "verify")
      sub->add_option("--s-schedule,--s-list", o.s_list, "s values")->delimiter(',');
    if (kind == "gamma") sub->add_option("--k-list", o.k_list, "schedule indices")->delimiter(',');
    if (kind == "gamma" || kind == "schedule" || kind == "quantize") sub->add_option("--eps-list", o.eps_list, "eps values")->delimiter(',');
    if (kind == "gamma" || kind == "schedule") sub->add_option("--policy", o.policy, "default or naive");
    if (kind == "perimeter" || kind == "variation") sub->add_option("--shapes", o.shapes, "ball, square, annulus")->delimiter(',');
    if (kind == "decompose") sub->add_option("--delta", o.delta, "approximation tolerance");
    if (kind == "lemma55") sub->add_option("--alpha-list", o.alpha_list, "alpha values")->delimiter(',');
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (const auto& [sub, kind] : kinds) {
    if (!sub->parsed()) continue;
    try {
      return run(kind, o);
    } catch (const ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 2;
}
