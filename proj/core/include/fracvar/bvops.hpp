#pragma once

#include "fracvar/density.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/grid.hpp"

#include <array>
#include <map>
#include <utility>
#include <vector>

namespace fracvar {

// Neighborhood stencil for Cauchy-Crofton interface energies (n = 2). Directions are listed
// up to sign; the calibration normals are the directions rotated by a quarter turn.
struct Stencil {
  int order = 4;
  std::vector<std::array<int, 2>> dirs;
  std::vector<Point> normals;
  // Inverse of C_jk = |e_k / |e_k| . normal_j|, row-major.
  std::vector<double> inverse;
  // Coefficients for psi = |xi|.
  std::vector<double> isotropic;
};
// order in {4, 8, 16}; throws otherwise.
const Stencil& stencil(int order);

// Crofton coefficients m_k at x: the solution of C m = psi(x, normal_j). A straight interface
// of normal nu then has energy per unit length sum_k m_k |e_k/|e_k| . nu|, equal to psi(x, nu)
// for every stencil normal. Negative coefficients are clamped to zero; returns the number clamped.
int crofton_coefficients(const Stencil& st, const Density& psi, const Point& x, double* m);

// Pair edges between cell centers. For n = 2 each direction k contributes edges (p, p + e_k)
// with weight h m_k(midpoint) / |e_k|; for n = 1 the single edge weight is psi(midpoint, e_1).
struct EdgeSet {
  std::vector<std::size_t> p, q;
  std::vector<double> weight;
  std::vector<int> direction;
  std::size_t clamped = 0;
  std::size_t size() const { return weight.size(); }
};
// Only edges with at least one endpoint in `touching` (all edges when null).
EdgeSet stencil_edges(const Grid& g, const Density& psi, int order, const DomainMask* touching = nullptr);

// Fraction of an edge's energy attributed to the mask: half per endpoint inside.
inline double attribution(const DomainMask& m, std::size_t p, std::size_t q) { return 0.5 * (m.inside[p] + m.inside[q]); }

struct InterfaceEnergyReport {
  double total = 0.0;
  // Same stencil with psi = |xi|; lambda * interface_variation <= total <= Lambda * interface_variation.
  double interface_variation = 0.0;
  int stencil_order = 4;
  // Keyed by (lower label index, higher label index).
  std::map<std::pair<int, int>, double> per_pair;
  std::size_t cut_edges = 0;
  std::size_t clamped_weights = 0;
};
InterfaceEnergyReport anisotropic_energy(const LabelField& u, const Density& psi, const DomainMask& omega, int order);
InterfaceEnergyReport anisotropic_energy(const LabelField& u, const EdgeSet& edges, const DomainMask& omega, int order);

// sum_edges weight |w_p - w_q| with mask attribution: the discrete E(w) for real-valued w.
double anisotropic_energy_real(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega);

// Energy of the level set {w >= t}: edges with min(w_p, w_q) < t <= max(w_p, w_q).
double level_energy(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega, double t);
// Exact integral of level_energy over [a, b] (the level energy is piecewise constant in t).
double level_energy_integral(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega, double a, double b);

// sum over omega of psi(x, I^{1-s} Du) h^n; u is its own extension.
double frac_energy(const LabelField& u, const Density& psi, const DomainMask& omega, const FracOperatorConfig& cfg);

struct CoareaReport {
  double direct = 0.0;          // E(w)
  double level_integral = 0.0;  // midpoint quadrature of level energies over t_samples
  double relative_gap = 0.0;
};
// t_samples sorted ascending; the quadrature uses the midpoints of consecutive samples.
CoareaReport coarea_identity_check(const ScalarField& w, const Density& psi, const DomainMask& omega, const std::vector<double>& t_samples, int order = 8);

struct ThresholdCheck {
  double t = 0.0;
  double lo = 0.0, hi = 0.0;      // admissible interval [c_{i-1} + eps theta/2, c_i - eps theta/2]
  double level = 0.0;             // level energy at t
  double gap_integral = 0.0;      // integral of level energies over [c_{i-1}, c_i]
  double lhs = 0.0;               // (c_i - c_{i-1} - eps theta) level
  bool holds = true;              // lhs <= gap_integral
};

struct QuantizeResult {
  LabelField v;
  std::vector<double> thresholds;  // t^2 .. t^M
  std::vector<ThresholdCheck> checks;
  double energy_v = 0.0;           // sum_i (c_i - c_{i-1}) level(t^i)
  double energy_w = 0.0;           // E of the clamped w
  double energy_ratio = 1.0;       // energy_v / energy_w
  bool guarantee_holds = true;     // (1 - eps) energy_v <= energy_w
};
QuantizeResult coarea_quantize(const ScalarField& w, const LabelSet& labels, const Density& psi, const DomainMask& omega, double eps, int order = 8);

// u inside omega, pad_label outside.
LabelField extend_label_field(const LabelField& u, const DomainMask& omega, int pad_label);

}  // namespace fracvar
