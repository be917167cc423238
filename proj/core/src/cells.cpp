#include "fracvar/cells.hpp"

#include "fracvar/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracvar {

std::string to_string(CellSolver s) { return s == CellSolver::ExactMincut ? "exact-mincut" : "expansion"; }

namespace {

double labeling_energy(const LabelField& u, const EdgeSet& edges, const DomainMask& m) {
  double e = 0.0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const int a = u.index[edges.p[k]], b = u.index[edges.q[k]];
    if (a != b) e += attribution(m, edges.p[k], edges.q[k]) * edges.weight[k] * std::abs(u.value(edges.p[k]) - u.value(edges.q[k]));
  }
  return e;
}

// Binary move: x = 0 gives option0[p], x = 1 gives option1[p], for free cells.
LabelField binary_move(const LabelField& cur, const EdgeSet& edges, const DomainMask& m, const std::vector<std::uint8_t>& free,
                       const std::vector<int>& option0, const std::vector<int>& option1) {
  const Grid& g = cur.grid;
  std::vector<std::size_t> var(g.size(), static_cast<std::size_t>(-1));
  std::size_t nv = 0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (free[k]) var[k] = nv++;
  BinaryGraphCut cut(nv);
  auto c = [&](int idx) { return cur.labels[static_cast<std::size_t>(idx)]; };
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t p = edges.p[e], q = edges.q[e];
    const double w = attribution(m, p, q) * edges.weight[e];
    if (w == 0.0) continue;
    const bool fp = free[p], fq = free[q];
    if (!fp && !fq) continue;
    if (fp && fq) {
      cut.add_pairwise(var[p], var[q], w * std::abs(c(option0[p]) - c(option0[q])), w * std::abs(c(option0[p]) - c(option1[q])),
                       w * std::abs(c(option1[p]) - c(option0[q])), w * std::abs(c(option1[p]) - c(option1[q])));
    } else {
      const std::size_t f = fp ? p : q, o = fp ? q : p;
      const double fixed = c(cur.index[o]);
      cut.add_unary(var[f], w * std::abs(c(option0[f]) - fixed), w * std::abs(c(option1[f]) - fixed));
    }
  }
  cut.solve();
  LabelField out = cur;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (free[k]) out.index[k] = cut.label(var[k]) ? option1[k] : option0[k];
  return out;
}

}  // namespace

LabelingResult minimize_labeling(const LabelField& init, const EdgeSet& edges, const DomainMask& attribution_mask, const std::vector<std::uint8_t>& free) {
  const Grid& g = init.grid;
  if (free.size() != g.size()) throw std::invalid_argument("free flags do not match the grid");
  LabelingResult r;
  const int M = static_cast<int>(init.labels.size());
  if (M == 2) {
    r.solver = CellSolver::ExactMincut;
    r.labels = binary_move(init, edges, attribution_mask, free, std::vector<int>(g.size(), 0), std::vector<int>(g.size(), 1));
    r.energy = labeling_energy(r.labels, edges, attribution_mask);
    return r;
  }
  r.solver = CellSolver::Expansion;
  r.labels = init;
  r.energy = labeling_energy(r.labels, edges, attribution_mask);
  for (int sweep = 0; sweep < 64; ++sweep) {
    bool improved = false;
    for (int a = 0; a < M; ++a) {
      LabelField cand = binary_move(r.labels, edges, attribution_mask, free, r.labels.index, std::vector<int>(g.size(), a));
      const double e = labeling_energy(cand, edges, attribution_mask);
      const bool accept = e < r.energy - 1e-12 * std::max(1.0, r.energy);
      r.trace.push_back({sweep, a, r.energy, accept ? e : r.energy});
      if (accept) {
        r.labels = std::move(cand);
        r.energy = e;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return r;
}

DomainMask inner_band(const DomainMask& mask, int band) {
  const Grid& g = mask.grid;
  DomainMask out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!mask.inside[g.index(i, j)]) continue;
      bool near = false;
      for (int dj = -band; dj <= band && !near; ++dj)
        for (int di = -band; di <= band && !near; ++di) {
          const int ii = i + di, jj = j + dj;
          if (g.n == 1 && dj != 0) continue;
          if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= g.ny() || !mask.inside[g.index(ii, jj)]) near = true;
        }
      out.inside[g.index(i, j)] = near ? 1 : 0;
    }
  return out;
}

void CellProblemSpec::validate() const {
  if (!psi) throw std::invalid_argument("cell problem needs a density");
  if (std::abs(norm(nu) - 1.0) > 1e-9) throw std::invalid_argument("nu must be a unit vector");
  if (!(r > 0.0)) throw std::invalid_argument("cube side must be positive");
  if (resolution < 16) throw std::invalid_argument("resolution must be at least 16");
  if (ci < 0 || cj < 0 || static_cast<std::size_t>(std::max(ci, cj)) >= labels.size()) throw std::invalid_argument("label index out of range");
  if (boundary_band < 1) throw std::invalid_argument("boundary band must be at least one cell");
  if (2 * boundary_band >= resolution) throw std::invalid_argument("boundary band leaves no free cells");
  (void)fracvar::stencil(stencil);
}

CellSolution solve_cell(const CellProblemSpec& spec) {
  spec.validate();
  const double h = spec.r / spec.resolution;
  const double half = 0.5 * spec.r * (std::abs(spec.nu[0]) + std::abs(spec.nu[1]));
  const int m = static_cast<int>(std::ceil(half / h - 1e-9)) + 3;
  const Grid g = Grid::make(2, {2 * m, 2 * m}, h, {spec.x[0] - m * h, spec.x[1] - m * h});
  CellSolution sol;
  sol.cube = rotated_cube_mask(spec.x, spec.nu, spec.r, g);
  const DomainMask band = inner_band(sol.cube, spec.boundary_band);
  std::vector<std::uint8_t> free(g.size(), 0);
  std::size_t nfree = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    free[k] = sol.cube.inside[k] && !band.inside[k];
    nfree += free[k];
  }
  if (nfree == 0) throw std::invalid_argument("boundary band covers the whole cube");
  const LabelField datum = halfspace_datum(spec.x, spec.nu, spec.ci, spec.cj, g, spec.labels);
  const EdgeSet edges = stencil_edges(g, *spec.psi, spec.stencil, &sol.cube);
  sol.datum_energy = anisotropic_energy(datum, edges, sol.cube, spec.stencil).total;
  LabelingResult lr = minimize_labeling(datum, edges, sol.cube, free);
  sol.minimizer = std::move(lr.labels);
  sol.value = anisotropic_energy(sol.minimizer, edges, sol.cube, spec.stencil).total;
  sol.normalized = sol.value / spec.r;
  sol.solver = lr.solver;
  sol.trace = std::move(lr.trace);
  return sol;
}

ScalingReport scaling_identity_check(const CellProblemSpec& spec, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  CellProblemSpec small = spec;
  small.psi = std::make_shared<RescaledDensity>(spec.psi, eps);
  CellProblemSpec big = spec;
  big.x = {spec.x[0] / eps, spec.x[1] / eps};
  big.r = spec.r / eps;
  ScalingReport rep;
  rep.rescaled = solve_cell(small).value;
  rep.blown_up = eps * solve_cell(big).value;
  const double scale = std::max(std::abs(rep.rescaled), std::abs(rep.blown_up));
  rep.gap = scale > 0.0 ? std::abs(rep.rescaled - rep.blown_up) / scale : 0.0;
  return rep;
}

namespace {

double period_length(const Density& psi) {
  const auto p = psi.period();
  if (!p) throw std::invalid_argument("homogenization needs a periodic density");
  return std::max((*p)[0], (*p)[1]);
}

}  // namespace

HomEstimate estimate_psi_hom(const CellProblemSpec& base, const std::vector<double>& t_schedule, int cells_per_period) {
  if (!base.psi) throw std::invalid_argument("cell problem needs a density");
  const double P = period_length(*base.psi);
  if (t_schedule.empty()) throw std::invalid_argument("empty t schedule");
  HomEstimate est;
  for (double t : t_schedule) {
    if (!est.t.empty() && t <= est.t.back()) throw std::invalid_argument("t schedule must increase");
    CellProblemSpec spec = base;
    spec.r = t * P;
    spec.x = {t * base.x[0], t * base.x[1]};
    spec.resolution = static_cast<int>(std::lround(t * cells_per_period));
    est.t.push_back(t);
    est.normalized.push_back(solve_cell(spec).normalized);
  }
  const std::size_t n = est.normalized.size();
  est.extrapolated = est.normalized.back();
  if (n >= 3) {
    const double a = est.normalized[n - 3], b = est.normalized[n - 2], c = est.normalized[n - 1];
    const bool doubling = std::abs(est.t[n - 2] - 2.0 * est.t[n - 3]) < 1e-9 && std::abs(est.t[n - 1] - 2.0 * est.t[n - 2]) < 1e-9;
    const bool monotone = (b - a) * (c - b) > 0.0 && std::abs(c - b) < std::abs(b - a);
    if (doubling && monotone) {
      // Errors of the form A/t + B/t^2 cancel.
      est.extrapolated = (8.0 * c - 6.0 * b + a) / 3.0;
      est.richardson = true;
    }
    est.trend_ok = std::abs(c - b) <= std::abs(b - a) + 1e-12 * std::max(1.0, std::abs(c));
  } else {
    est.trend_ok = true;
  }
  return est;
}

CellFormulaTable cell_formula_sweep(const CellProblemSpec& base, const std::vector<double>& r_schedule, const std::vector<double>& eps_schedule,
                                    int cells_per_period, double tolerance) {
  if (!base.psi) throw std::invalid_argument("cell problem needs a density");
  if (r_schedule.empty() || eps_schedule.empty()) throw std::invalid_argument("empty schedule");
  for (std::size_t i = 1; i < r_schedule.size(); ++i)
    if (r_schedule[i] >= r_schedule[i - 1]) throw std::invalid_argument("r schedule must decrease");
  for (std::size_t i = 1; i < eps_schedule.size(); ++i)
    if (eps_schedule[i] >= eps_schedule[i - 1]) throw std::invalid_argument("eps schedule must decrease (k increasing)");
  const bool periodic = base.psi->period().has_value();
  const double P = periodic ? period_length(*base.psi) : 1.0;
  CellFormulaTable tab;
  tab.r = r_schedule;
  tab.eps = eps_schedule;
  for (double r : r_schedule) {
    std::vector<double> row;
    for (double eps : eps_schedule) {
      CellProblemSpec spec = base;
      spec.r = r;
      spec.psi = periodic ? std::make_shared<RescaledDensity>(base.psi, eps) : base.psi;
      spec.resolution = std::max(16, static_cast<int>(std::lround(cells_per_period * r / (eps * P))));
      row.push_back(solve_cell(spec).normalized);
    }
    tab.value.push_back(std::move(row));
  }
  auto last_two = [](const std::vector<double>& v, bool want_max) {
    if (v.size() == 1) return v.back();
    const double a = v[v.size() - 2], b = v.back();
    return want_max ? std::max(a, b) : std::min(a, b);
  };
  std::vector<double> inner_min, inner_max;
  for (const auto& row : tab.value) {
    inner_min.push_back(last_two(row, false));
    inner_max.push_back(last_two(row, true));
  }
  tab.psi_prime = last_two(inner_min, true);
  tab.psi_doubleprime = last_two(inner_max, false);
  const double scale = std::max(std::abs(tab.psi_prime), std::abs(tab.psi_doubleprime));
  tab.agree = scale == 0.0 || std::abs(tab.psi_prime - tab.psi_doubleprime) <= tolerance * scale;
  return tab;
}

DomainMask dilate(const DomainMask& mask, double d) {
  const Grid& g = mask.grid;
  const int rad = static_cast<int>(std::floor(d / g.h + 1e-9));
  DomainMask out = mask;
  if (rad == 0) return out;
  std::vector<std::array<int, 2>> offsets;
  for (int dj = -rad; dj <= rad; ++dj)
    for (int di = -rad; di <= rad; ++di)
      if ((di * di + dj * dj) * g.h * g.h <= d * d * (1.0 + 1e-12) && (g.n == 2 || dj == 0)) offsets.push_back({di, dj});
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      if (!mask.inside[g.index(i, j)]) continue;
      for (const auto& o : offsets) {
        const int ii = i + o[0], jj = j + o[1];
        if (ii >= 0 && jj >= 0 && ii < g.nx() && jj < g.ny()) out.inside[g.index(ii, jj)] = 1;
      }
    }
  return out;
}

std::vector<LabelField> build_recovery_sequence(const LabelField& u, const DomainMask& omega, const std::vector<RecoveryStep>& steps,
                                                const RecoveryOptions& opt) {
  const Grid& g = u.grid;
  if (g.n != 2) throw std::invalid_argument("recovery sequences are built on two-dimensional grids");
  if (!omega.grid.same_layout(g)) throw std::invalid_argument("mask grid differs from field grid");
  if (opt.pad_label < 0 || static_cast<std::size_t>(opt.pad_label) >= u.labels.size()) throw std::invalid_argument("pad label outside the label set");
  const DomainMask enlarged = dilate(omega, opt.margin);
  const DomainMask band = inner_band(enlarged, opt.boundary_band);
  // Jump set of u: cells with a differing 4-neighbor.
  DomainMask jump(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const int a = u.index[g.index(i, j)];
      const bool differs = (i + 1 < g.nx() && u.index[g.index(i + 1, j)] != a) || (i > 0 && u.index[g.index(i - 1, j)] != a) ||
                           (j + 1 < g.ny() && u.index[g.index(i, j + 1)] != a) || (j > 0 && u.index[g.index(i, j - 1)] != a);
      jump.inside[g.index(i, j)] = differs ? 1 : 0;
    }
  std::vector<LabelField> out;
  for (const auto& step : steps) {
    if (!step.psi) throw std::invalid_argument("recovery step needs a density");
    const DomainMask tube = dilate(jump, std::max(step.tube_width, 0.0));
    std::vector<std::uint8_t> free(g.size(), 0);
    for (std::size_t k = 0; k < g.size(); ++k) free[k] = enlarged.inside[k] && !band.inside[k] && tube.inside[k];
    const EdgeSet edges = stencil_edges(g, *step.psi, opt.stencil, &enlarged);
    LabelField w = minimize_labeling(u, edges, enlarged, free).labels;
    out.push_back(extend_label_field(w, enlarged, opt.pad_label));
  }
  return out;
}

}  // namespace fracvar
