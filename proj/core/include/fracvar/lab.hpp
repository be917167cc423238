#pragma once

#include "fracvar/density.hpp"
#include "fracvar/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace fracvar::lab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DensitySpec {
  std::string type = "homogeneous";  // homogeneous | ellipse | laminate | cosine | checkerboard | table
  double value = 1.0;                // homogeneous
  double a = 1.0, b = 1.0, angle = 0.0;  // ellipse semi-axes, rotation in degrees
  double low = 1.0, high = 2.0;      // laminate, checkerboard
  double period = 1.0;
  double phase = 0.0;
  int axis = 0;
  double mean = 1.5, amplitude = 0.5;  // cosine laminate
  std::string table_path;              // table: rows of whitespace-separated samples over one period cell

  DensityPtr build() const;
};

// Plain-text key = value configuration with [sections]; see README for the key list.
struct ExperimentConfig {
  std::string kind = "verify";
  std::uint64_t seed = 1;
  int workers = 1;

  int cells = 256;
  double lo = -0.5, hi = 1.5;

  DensitySpec density;
  std::vector<double> labels{0.0, 1.0};

  std::vector<double> s_schedule;
  std::vector<double> eps_schedule;
  std::vector<int> k_schedule;
  std::string policy = "default";  // default | naive

  std::vector<std::string> shapes{"ball", "square", "annulus"};
  std::string measure = "mollified";
  int perimeter_cells = 512;

  double nu_angle = 90.0;  // degrees
  double r = 1.0;
  int pair_i = 1, pair_j = 0;
  std::vector<double> t_schedule{4.0, 8.0, 16.0};
  int cells_per_period = 16;
  int resolution = 32;
  int stencil = 16;

  int samples = 5;
  double mu_fault = 1.0;
  double delta = 0.05;
  std::vector<double> alpha_list{0.05, 0.1, 0.3};

  double tolerance = 0.0;  // 0: the experiment's own default

  std::string out_dir = ".";
  std::string csv;  // empty: <kind>.csv
  bool svg = true;

  void validate() const;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

enum class Provenance { Paper, Trivial, Derived };
std::string tag(Provenance p);

struct ReferenceNote {
  std::string name;
  double value = 0.0;
  Provenance provenance = Provenance::Derived;
  std::string source;
};

struct ConvergenceRow {
  int index = 0;
  std::string label;
  std::vector<double> params;
  double measured = 0.0;
  double reference = 0.0;
  double relative_error = 0.0;
};

struct ConvergenceTable {
  std::string experiment;
  std::vector<std::string> param_names;
  std::vector<ConvergenceRow> rows;
  std::vector<ReferenceNote> references;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> flags;
  bool passed = true;

  void add_row(ConvergenceRow row);  // fills relative_error from measured/reference
};

// `#` metadata lines, then a header row and one row per sample. Numbers use %.10g.
void write_csv(std::ostream& os, const ConvergenceTable& t);
// Relative error (log scale) against the named parameter, one polyline per row label.
void write_svg(std::ostream& os, const ConvergenceTable& t, const std::string& x_param);

struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;
  double tolerance = 0.0;
  std::uint64_t worst_seed = 0;
  std::string detail;
};
struct VerificationReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  ConvergenceTable table() const;
};

// Smooth compactly supported test fields: sums of three bumps inside [-1/2, 1/2]^n.
ScalarField random_bump_field(const Grid& g, std::uint64_t seed);
VectorField random_bump_vector(const Grid& g, std::uint64_t seed);

ConvergenceTable run_constants(const ExperimentConfig& cfg);
VerificationReport run_verification_suite(const ExperimentConfig& cfg);
ConvergenceTable run_variation(const ExperimentConfig& cfg);
ConvergenceTable run_quantize(const ExperimentConfig& cfg);
ConvergenceTable run_cell(const ExperimentConfig& cfg);
ConvergenceTable run_homogenize(const ExperimentConfig& cfg);
ConvergenceTable run_perimeter_sweep(const ExperimentConfig& cfg);
ConvergenceTable run_gamma_sweep(const ExperimentConfig& cfg);
ConvergenceTable run_decompose(const ExperimentConfig& cfg);
ConvergenceTable run_schedule(const ExperimentConfig& cfg);
ConvergenceTable run_mollification_bound(const ExperimentConfig& cfg);

// Runs f(0..count-1) on `workers` threads; results are stored by index, so the merge order
// does not depend on the schedule. The first exception (by index) is rethrown.
template <class R>
std::vector<R> run_indexed(std::size_t count, int workers, const std::function<R(std::size_t)>& f) {
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < w; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace fracvar::lab
