#pragma once

#include "fracvar/grid.hpp"

#include <limits>
#include <optional>
#include <string>

namespace fracvar {

enum class LatticeEngine { Fft, Direct };

// How the jump measure of a label field is represented before applying I^{1-s}.
// Faces: one atom per differing face pair (exact measure, staircase geometry).
// Mollified: gradient of a Gaussian-mollified field (isotropic, smeared over ~sigma).
enum class MeasureModel { Faces, Mollified };

struct FracOperatorConfig {
  double s = 0.5;
  // Cells closer than this (in cells) get a subdivided quadrature rule.
  int quadrature_cutoff = 3;
  // Largest enlargement factor of the box for whole-space totals.
  double tail_radius_factor = 65536.0;
  double fft_padding_factor = 2.0;
  LatticeEngine engine = LatticeEngine::Fft;
  MeasureModel measure = MeasureModel::Faces;
  double mollifier_cells = 1.5;
  double tail_tolerance = 1e-3;
  // Multiplies mu_s inside the direct gradient only; != 1 injects a fault for negative controls.
  double mu_fault = 1.0;

  void validate() const;
};

// Central differences, zero extension outside the grid.
VectorField central_gradient(const ScalarField& f);
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& f, double p);
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

// I^alpha f with cell-integrated kernel and zero-padded FFT convolution.
ScalarField riesz_potential_field(const ScalarField& f, double alpha, const FracOperatorConfig& cfg);
VectorField riesz_potential_field(const VectorField& f, double alpha, const FracOperatorConfig& cfg);

// Direct summation (1/gamma_alpha) sum_atoms w e_axis / |x - p|^{n-alpha}. Points sitting
// on an atom are moved h/2 along its normal.
std::vector<Point> riesz_potential_measure(const FaceMeasure& mu, double alpha, const std::vector<Point>& points);
VectorField riesz_potential_measure(const FaceMeasure& mu, double alpha, const Grid& eval);

// grad^s psi by singular quadrature over the whole lattice: exact cell moments of the
// kernel against a piecewise-linear reconstruction of psi.
VectorField frac_gradient_direct(const ScalarField& psi, const FracOperatorConfig& cfg);
// Central differences of I^{1-s} psi.
VectorField frac_gradient_potential(const ScalarField& psi, const FracOperatorConfig& cfg);
// I^{1-s} applied to the central-difference gradient of psi.
VectorField frac_gradient_potential_of_gradient(const ScalarField& psi, const FracOperatorConfig& cfg);
ScalarField frac_divergence(const VectorField& Psi, const FracOperatorConfig& cfg);

VectorField nl_gradient(const ScalarField& psi, const ScalarField& phi, const FracOperatorConfig& cfg);
ScalarField nl_divergence(const VectorField& Psi, const ScalarField& phi, const FracOperatorConfig& cfg);

struct DualityReport {
  double gradient_pairing = 0.0;    // <grad^s psi, Psi>
  double divergence_pairing = 0.0;  // <psi, div^s Psi>
  double residual = 0.0;            // |sum of both|
  double relative = 0.0;            // residual / |gradient_pairing|
};
DualityReport duality_residual(const ScalarField& psi, const VectorField& Psi, const FracOperatorConfig& cfg);

struct IdentityReport {
  double residual_l2 = 0.0;
  double reference_l2 = 0.0;
  double relative = 0.0;
};
// grad^s(psi phi) - psi grad^s phi - phi grad^s psi - grad^s_NL(psi, phi).
IdentityReport leibniz_residual(const ScalarField& psi, const ScalarField& phi, const FracOperatorConfig& cfg);
// div^s(Psi phi) - Psi . grad^s phi - phi div^s Psi - div^s_NL(Psi, phi).
IdentityReport leibniz_divergence_residual(const VectorField& Psi, const ScalarField& phi, const FracOperatorConfig& cfg);
// Relative L2 distance between the direct and potential gradients.
IdentityReport cross_path_residual(const ScalarField& psi, const FracOperatorConfig& cfg);

struct EstimateReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool holds = true;
  double ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
};
// ||grad^s psi||_p <= 2 omega_n mu_s / (s (1-s) 2^s) ||psi||_p^{1-s} ||grad psi||_p^s, 5% slack.
EstimateReport lp_estimate_check(const ScalarField& psi, double p, const FracOperatorConfig& cfg);

struct NlEstimateReport {
  double lhs = 0.0;
  double constant = 0.0;
  // ||psi|| ||phi||^s ||grad phi||^{1-s}: the exponents as printed.
  double rhs_printed = 0.0;
  // ||psi|| ||phi||^{1-s} ||grad phi||^s: the dilation-consistent exponents.
  double rhs_scaled = 0.0;
  bool holds_printed = true;
  bool holds_scaled = true;
};
NlEstimateReport nl_estimate_check(const ScalarField& psi, const ScalarField& phi, const FracOperatorConfig& cfg);

struct FracVariationResult {
  VectorField density;        // I^{1-s} Du on the input grid
  double total_on_mask = 0.0; // sum over the query region of |density| h^n
  double tail_estimate = 0.0; // extrapolated mass beyond the last box (whole-space query)
  int levels = 1;             // boxes used (whole-space query)
  double extension_value = 0.0;
  double total_with_tail() const { return total_on_mask + tail_estimate; }
};

// Whole-space query when omega is empty.
FracVariationResult frac_variation(const LabelField& u, const std::optional<DomainMask>& omega, const FracOperatorConfig& cfg);

// Total variation of the discrete Du used by the chosen measure model, over cells/atoms in B_rad(center).
double measure_variation_in_ball(const LabelField& u, const Point& center, double rad, const FracOperatorConfig& cfg);

struct V1sReport {
  double lhs = 0.0;             // ||grad^s u||_{L1(B_R)}
  double variation_3r = 0.0;    // |Du|(B_{3R})
  double sup_norm = 0.0;
  double c_variation = 0.0;     // 2 omega_n R^{1-s} mu_s / ((1-s) 2^s)
  double c_sup = 0.0;           // 2^{1+s} omega_n^2 R^{n-s} mu_s Gamma(1-s) / s
  double limit_variation = 0.0; // n
  double limit_sup = 0.0;       // 4 n omega_n R^{n-1}
  double rhs = 0.0;
  bool holds = true;
};
V1sReport v1s_estimate_check(const LabelField& u, double R, const Point& center, const FracOperatorConfig& cfg);
// Constants only (no field): used for the s -> 1 limit checks.
V1sReport v1s_constants(int n, double R, double s);

MeasureModel parse_measure_model(const std::string& name);
std::string to_string(MeasureModel m);

}  // namespace fracvar
