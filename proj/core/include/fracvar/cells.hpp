#pragma once

#include "fracvar/bvops.hpp"
#include "fracvar/density.hpp"
#include "fracvar/grid.hpp"

#include <string>
#include <vector>

namespace fracvar {

enum class CellSolver { ExactMincut, Expansion };
std::string to_string(CellSolver s);

// One accepted or rejected expansion move.
struct MoveRecord {
  int sweep = 0;
  int label = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
};

// Minimizes sum_edges attribution * weight * |c_a - c_b| over the cells flagged free,
// starting from `init` (which also supplies the frozen values). Two labels: one exact min-cut.
// More labels: expansion moves until a full sweep brings no improvement.
struct LabelingResult {
  LabelField labels;
  double energy = 0.0;
  CellSolver solver = CellSolver::ExactMincut;
  std::vector<MoveRecord> trace;
};
LabelingResult minimize_labeling(const LabelField& init, const EdgeSet& edges, const DomainMask& attribution_mask, const std::vector<std::uint8_t>& free);

// Cells of `mask` within `band` cells (Chebyshev) of a cell outside it.
DomainMask inner_band(const DomainMask& mask, int band);

struct CellProblemSpec {
  Point x{0.0, 0.0};
  Point nu{0.0, 1.0};
  double r = 1.0;
  int ci = 1;  // label index above the interface
  int cj = 0;  // label index below
  LabelSet labels{std::vector<double>{0.0, 1.0}};
  DensityPtr psi;
  int resolution = 32;  // cells per cube side
  int boundary_band = 2;
  int stencil = 16;

  void validate() const;
};

struct CellSolution {
  double value = 0.0;       // energy of the minimizer on the cube
  double normalized = 0.0;  // value / r^{n-1}
  double datum_energy = 0.0;
  LabelField minimizer;
  DomainMask cube;
  CellSolver solver = CellSolver::ExactMincut;
  std::vector<MoveRecord> trace;
};
CellSolution solve_cell(const CellProblemSpec& spec);

struct ScalingReport {
  double rescaled = 0.0;  // m_k(Q_r(x)) with psi(./eps)
  double blown_up = 0.0;  // eps^{n-1} m(Q_{r/eps}(x/eps)) with psi
  double gap = 0.0;       // relative
};
// The spec's psi is the periodic base density.
ScalingReport scaling_identity_check(const CellProblemSpec& spec, double eps);

struct HomEstimate {
  std::vector<double> t;
  std::vector<double> normalized;
  double extrapolated = 0.0;
  bool richardson = false;  // false: last sample returned
  bool trend_ok = false;
};
// Solves m(Q_{tP}^nu(t x)) / (tP)^{n-1} with P the period and cells-per-period fixed.
HomEstimate estimate_psi_hom(const CellProblemSpec& base, const std::vector<double>& t_schedule, int cells_per_period);

struct CellFormulaTable {
  std::vector<double> r;
  std::vector<double> eps;
  std::vector<std::vector<double>> value;  // value[i][j] = m_k(Q_{r_i}) / r_i^{n-1} at eps_j
  double psi_prime = 0.0;                  // outer max over the last two r of inner min over the last two eps
  double psi_doubleprime = 0.0;            // outer min over the last two r of inner max over the last two eps
  bool agree = false;
};
// psi_k = psi(x / eps_k) with eps_k from `eps_schedule`; cells per period held at `cells_per_period`.
CellFormulaTable cell_formula_sweep(const CellProblemSpec& base, const std::vector<double>& r_schedule, const std::vector<double>& eps_schedule,
                                    int cells_per_period, double tolerance = 0.02);

struct RecoveryStep {
  DensityPtr psi;
  double tube_width = 0.0;  // free cells within this distance of the jump set of u
};
struct RecoveryOptions {
  double margin = 0.125;  // Omega^eps = cells within this distance of Omega
  int boundary_band = 2;
  int stencil = 16;
  int pad_label = 0;
};
// Cells within distance d of the mask (d >= 0).
DomainMask dilate(const DomainMask& mask, double d);
// For each step: minimize E_k on Omega^eps with u frozen on the band and outside the tube,
// then pad by the label pad_label outside Omega^eps.
std::vector<LabelField> build_recovery_sequence(const LabelField& u, const DomainMask& omega, const std::vector<RecoveryStep>& steps,
                                                const RecoveryOptions& opt);

}  // namespace fracvar
