#pragma once

// Constants of the Riesz fractional calculus in dimension n in {1, 2}.

namespace fracvar {

// Gamma function for x > 0 (Lanczos, reflection below 1/2).
double gamma_fn(double x);

// Surface area of the unit sphere in R^n: omega_1 = 2, omega_2 = 2*pi.
double omega_n(int n);

// mu_s = 2^s Gamma((n+s+1)/2) / (pi^{n/2} Gamma((1-s)/2)), s in (0,1).
double mu_s(int n, double s);

// gamma_alpha = 2^alpha pi^{n/2} Gamma(alpha/2) / Gamma((n-alpha)/2), alpha in (0,n).
double gamma_alpha(int n, double alpha);

struct FracConstants {
  int n = 2;
  double s = 0.5;
  double mu = 0.0;
  double omega = 0.0;

  double gamma_alpha(double alpha) const;
  // Limits as s -> 1 and alpha -> 0.
  double mu_over_one_minus_s() const { return mu / (1.0 - s); }
  double mu_limit() const { return n / omega; }
};

FracConstants frac_constants(int n, double s);

void check_dimension(int n);

}  // namespace fracvar
