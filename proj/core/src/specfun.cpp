#include "fracvar/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fracvar {

namespace {

// g = 7, n = 9 coefficients.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos(double x) {
  // Valid for x >= 0.5.
  x -= 1.0;
  double a = kLanczos[0];
  const double t = x + kLanczosG + 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i);
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

}  // namespace

void check_dimension(int n) {
  if (n != 1 && n != 2) throw std::domain_error("dimension must be 1 or 2, got " + std::to_string(n));
}

double gamma_fn(double x) {
  if (!std::isfinite(x) || x <= 0.0) throw std::domain_error("gamma_fn: argument must be positive and finite");
  if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos(1.0 - x));
  return lanczos(x);
}

double omega_n(int n) {
  check_dimension(n);
  return n == 1 ? 2.0 : 2.0 * std::numbers::pi;
}

double mu_s(int n, double s) {
  check_dimension(n);
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("mu_s: s must lie in (0,1)");
  return std::pow(2.0, s) * gamma_fn(0.5 * (n + s + 1.0)) /
         (std::pow(std::numbers::pi, 0.5 * n) * gamma_fn(0.5 * (1.0 - s)));
}

double gamma_alpha(int n, double alpha) {
  check_dimension(n);
  if (!(alpha > 0.0 && alpha < n)) throw std::domain_error("gamma_alpha: alpha must lie in (0,n)");
  return std::pow(2.0, alpha) * std::pow(std::numbers::pi, 0.5 * n) * gamma_fn(0.5 * alpha) /
         gamma_fn(0.5 * (n - alpha));
}

double FracConstants::gamma_alpha(double alpha) const { return fracvar::gamma_alpha(n, alpha); }

FracConstants frac_constants(int n, double s) {
  FracConstants c;
  c.n = n;
  c.s = s;
  c.mu = mu_s(n, s);
  c.omega = omega_n(n);
  return c;
}

}  // namespace fracvar
