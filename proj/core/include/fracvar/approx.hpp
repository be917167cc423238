#pragma once

#include "fracvar/density.hpp"
#include "fracvar/grid.hpp"

#include <array>
#include <functional>
#include <vector>

namespace fracvar {

// r_b(eta) = sup{delta in (0,1] : |b(x) - b(y)| <= eta whenever |x - y| <= delta}, on samples.
// Offsets are scanned in order of length; the first offset whose sampled oscillation exceeds
// eta bounds the radius. Periodic samples wrap around.
double radius_uniform_continuity(const ScalarField& b, double eta, bool periodic = false);

// Callable version on the box [lo, hi] (n = 1 uses the first coordinate): sampling is refined
// until the spacing is at most r_b / 8 and two consecutive estimates agree within one spacing.
double radius_uniform_continuity(const std::function<double(const Point&)>& b, int n, const Point& lo, const Point& hi, double eta,
                                 bool periodic = false, int initial_cells = 64);

// b^i(x) phi^i(nu) approximation of a periodic density.
struct ConditionADecomposition {
  double delta = 0.0;
  double radius = 1.0;             // r_delta: balls of this radius around the centers
  Point period{0.0, 0.0};          // zero entries: no dependence on that axis
  std::vector<Point> centers;      // x^i
  int directions = 64;             // samples of phi^i on the upper half circle
  std::vector<std::vector<double>> phi;  // phi^i(nu_d) = psi(x^i, nu_d)
  double scan_error = 0.0;         // sup |psi - sum b^i phi^i| over the verification scan
  DensityPtr psi;

  std::size_t size() const { return centers.size(); }
  double weight(std::size_t i, const Point& x) const;  // b^i(x): bump quotient on the torus
  double approx(const Point& x, const Point& nu) const; // sum_i b^i(x) psi(x^i, nu)
  double scan(int points_per_axis, int directions) const;
};

// Throws std::runtime_error naming the worst (x, nu) when the certificate scan exceeds delta.
ConditionADecomposition decompose_condition_A(const DensityPtr& psi, double delta, int scan_points = 32, int directions = 64);

enum class SchedulePolicy { Default, Naive };

struct CompatibilitySchedule {
  std::vector<double> eps;
  std::vector<double> s;
  std::vector<double> diagnostic;  // (1 - s_k) log eps_k
  std::size_t peak = 0;            // index of the largest |diagnostic|
  std::vector<std::size_t> flagged;  // indices after the peak where |diagnostic| increases
  bool converges = false;
};
// Default: s_k = 1 - 1/(k (1 + |log eps_k|)); Naive: s_k = 1 - 1/k. eps[0] is eps_{first_k}.
CompatibilitySchedule build_compatibility_schedule(const std::vector<double>& eps, SchedulePolicy policy = SchedulePolicy::Default, int first_k = 1);

struct MollificationReport {
  double lhs = 0.0;                 // sup |I^alpha(b phi) - b phi| on samples
  std::array<double, 4> terms{};    // the four right-hand terms
  double rhs = 0.0;
  double eta = 0.0;                 // eta attaining the smallest right-hand side
  double r_b = 1.0;
  bool holds = false;
};

// Bump A exp(1 - 1/(1 - x^2/rho^2)) on |x| < rho.
struct Bump1D {
  double amplitude = 1.0;
  double rho = 1.0;
  double value(double x) const;
  double derivative(double x) const;
  double sup_derivative() const;
};

// One-dimensional check on a grid covering [-2R, 2R] with `cells` cells; phi supported in
// B_R (rho <= R). The right-hand side is minimized over eta_list.
MollificationReport mollification_bound_check(const std::function<double(double)>& b, const Bump1D& phi, double R, double alpha,
                                              const std::vector<double>& eta_list, int cells = 4096);

struct ScheduleRow {
  int k = 0;
  double eps = 0.0;
  double alpha = 0.0;
  double diagnostic = 0.0;  // alpha log eps
  double lhs = 0.0;
  bool spectral = false;    // oscillation unresolved on the grid: modulated-symbol evaluation
};
// b_k(x) = (1 + cos(2 pi x / eps_k)) / 2, lhs_k = sup |I^{alpha_k}(b_k phi) - b_k phi|.
std::vector<ScheduleRow> mollification_schedule(const std::vector<double>& eps, const std::vector<double>& alpha, const Bump1D& phi,
                                                int cells = 4096, int first_k = 1);

}  // namespace fracvar
