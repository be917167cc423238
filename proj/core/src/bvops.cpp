#include "fracvar/bvops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracvar {

namespace {

Stencil build_stencil(int order) {
  Stencil st;
  st.order = order;
  st.dirs = {{1, 0}, {0, 1}};
  if (order >= 8) {
    st.dirs.push_back({1, 1});
    st.dirs.push_back({-1, 1});
  }
  if (order >= 16) {
    st.dirs.push_back({2, 1});
    st.dirs.push_back({-1, 2});
    st.dirs.push_back({1, 2});
    st.dirs.push_back({-2, 1});
  }
  const std::size_t K = st.dirs.size();
  std::vector<Point> unit(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double l = std::hypot(st.dirs[k][0], st.dirs[k][1]);
    unit[k] = {st.dirs[k][0] / l, st.dirs[k][1] / l};
    st.normals.push_back({-unit[k][1], unit[k][0]});
  }
  Eigen::MatrixXd c(K, K);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t k = 0; k < K; ++k) c(j, k) = std::abs(dot(unit[k], st.normals[j]));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  if (!lu.isInvertible()) throw std::logic_error("singular stencil calibration");
  const Eigen::MatrixXd inv = lu.inverse();
  st.inverse.resize(K * K);
  st.isotropic.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < K; ++j) {
      st.inverse[k * K + j] = inv(k, j);
      st.isotropic[k] += inv(k, j);
    }
  return st;
}

}  // namespace

const Stencil& stencil(int order) {
  static const Stencil s4 = build_stencil(4), s8 = build_stencil(8), s16 = build_stencil(16);
  switch (order) {
    case 4: return s4;
    case 8: return s8;
    case 16: return s16;
    default: throw std::invalid_argument("stencil order must be 4, 8 or 16");
  }
}

int crofton_coefficients(const Stencil& st, const Density& psi, const Point& x, double* m) {
  const std::size_t K = st.dirs.size();
  if (psi.isotropic()) {
    const double a = psi.weight(x);
    for (std::size_t k = 0; k < K; ++k) m[k] = a * st.isotropic[k];
  } else {
    double vals[8];
    for (std::size_t j = 0; j < K; ++j) vals[j] = psi.eval_unit(x, st.normals[j]);
    for (std::size_t k = 0; k < K; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < K; ++j) acc += st.inverse[k * K + j] * vals[j];
      m[k] = acc;
    }
  }
  int clamped = 0;
  for (std::size_t k = 0; k < K; ++k)
    if (m[k] < 0.0) {
      m[k] = 0.0;
      ++clamped;
    }
  return clamped;
}

EdgeSet stencil_edges(const Grid& g, const Density& psi, int order, const DomainMask* touching) {
  EdgeSet e;
  if (g.n == 1) {
    for (int i = 0; i + 1 < g.nx(); ++i) {
      const std::size_t p = g.index(i, 0), q = g.index(i + 1, 0);
      if (touching && !touching->inside[p] && !touching->inside[q]) continue;
      const Point mid{g.origin[0] + (i + 1.0) * g.h, 0.0};
      e.p.push_back(p);
      e.q.push_back(q);
      e.weight.push_back(psi.eval_unit(mid, {1.0, 0.0}));
      e.direction.push_back(0);
    }
    return e;
  }
  const Stencil& st = stencil(order);
  const std::size_t K = st.dirs.size();
  std::vector<double> len(K);
  for (std::size_t k = 0; k < K; ++k) len[k] = std::hypot(st.dirs[k][0], st.dirs[k][1]);
  const bool uniform = psi.x_independent();
  double m[8];
  if (uniform) e.clamped += static_cast<std::size_t>(crofton_coefficients(st, psi, {0.0, 0.0}, m));
  const std::size_t reserve = g.size() * K;
  e.p.reserve(reserve);
  e.q.reserve(reserve);
  e.weight.reserve(reserve);
  e.direction.reserve(reserve);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t p = g.index(i, j);
      for (std::size_t k = 0; k < K; ++k) {
        const int ii = i + st.dirs[k][0], jj = j + st.dirs[k][1];
        if (ii < 0 || jj < 0 || ii >= g.nx() || jj >= g.ny()) continue;
        const std::size_t q = g.index(ii, jj);
        if (touching && !touching->inside[p] && !touching->inside[q]) continue;
        double mk;
        if (uniform) {
          mk = m[k];
        } else {
          const Point mid{g.origin[0] + (i + 0.5 + 0.5 * st.dirs[k][0]) * g.h, g.origin[1] + (j + 0.5 + 0.5 * st.dirs[k][1]) * g.h};
          if (psi.isotropic()) {
            mk = std::max(0.0, psi.weight(mid) * st.isotropic[k]);
          } else {
            e.clamped += static_cast<std::size_t>(crofton_coefficients(st, psi, mid, m));
            mk = m[k];
          }
        }
        e.p.push_back(p);
        e.q.push_back(q);
        e.weight.push_back(g.h * mk / len[k]);
        e.direction.push_back(static_cast<int>(k));
      }
    }
  return e;
}

InterfaceEnergyReport anisotropic_energy(const LabelField& u, const Density& psi, const DomainMask& omega, int order) {
  return anisotropic_energy(u, stencil_edges(u.grid, psi, order, &omega), omega, order);
}

InterfaceEnergyReport anisotropic_energy(const LabelField& u, const EdgeSet& edges, const DomainMask& omega, int order) {
  if (u.grid.n == 2) (void)stencil(order);
  const Grid& g = u.grid;
  InterfaceEnergyReport r;
  r.stencil_order = order;
  r.clamped_weights = edges.clamped;
  const Stencil* st = g.n == 2 ? &stencil(order) : nullptr;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t p = edges.p[e], q = edges.q[e];
    const int a = u.index[p], b = u.index[q];
    if (a == b) continue;
    const double frac = attribution(omega, p, q);
    if (frac == 0.0) continue;
    const double jump = std::abs(u.labels[static_cast<std::size_t>(a)] - u.labels[static_cast<std::size_t>(b)]);
    const double contrib = frac * edges.weight[e] * jump;
    r.total += contrib;
    r.per_pair[{std::min(a, b), std::max(a, b)}] += contrib;
    ++r.cut_edges;
    if (st) {
      const auto k = static_cast<std::size_t>(edges.direction[e]);
      r.interface_variation += frac * g.h * st->isotropic[k] / std::hypot(st->dirs[k][0], st->dirs[k][1]) * jump;
    } else {
      r.interface_variation += frac * jump;
    }
  }
  return r;
}

double anisotropic_energy_real(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega) {
  double total = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    total += attribution(omega, edges.p[e], edges.q[e]) * edges.weight[e] * std::abs(w[edges.p[e]] - w[edges.q[e]]);
  return total;
}

double level_energy(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega, double t) {
  double total = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double a = w[edges.p[e]], b = w[edges.q[e]];
    if (std::min(a, b) < t && t <= std::max(a, b)) total += attribution(omega, edges.p[e], edges.q[e]) * edges.weight[e];
  }
  return total;
}

double level_energy_integral(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega, double a, double b) {
  double total = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double lo = std::max(a, std::min(w[edges.p[e]], w[edges.q[e]]));
    const double hi = std::min(b, std::max(w[edges.p[e]], w[edges.q[e]]));
    if (hi > lo) total += attribution(omega, edges.p[e], edges.q[e]) * edges.weight[e] * (hi - lo);
  }
  return total;
}

double frac_energy(const LabelField& u, const Density& psi, const DomainMask& omega, const FracOperatorConfig& cfg) {
  const FracVariationResult fv = frac_variation(u, omega, cfg);
  const Grid& g = u.grid;
  double total = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (omega.contains(k)) total += psi.eval(g.center(k), fv.density.value(k));
  return total * g.cell_volume();
}

CoareaReport coarea_identity_check(const ScalarField& w, const Density& psi, const DomainMask& omega, const std::vector<double>& t_samples, int order) {
  if (t_samples.size() < 2 || !std::is_sorted(t_samples.begin(), t_samples.end())) throw std::invalid_argument("t_samples must be sorted with at least two entries");
  const EdgeSet edges = stencil_edges(w.grid, psi, order, &omega);
  CoareaReport r;
  r.direct = anisotropic_energy_real(w, edges, omega);
  for (std::size_t i = 0; i + 1 < t_samples.size(); ++i) {
    const double dt = t_samples[i + 1] - t_samples[i];
    r.level_integral += dt * level_energy(w, edges, omega, 0.5 * (t_samples[i] + t_samples[i + 1]));
  }
  const double scale = std::max(std::abs(r.direct), std::abs(r.level_integral));
  r.relative_gap = scale > 0.0 ? std::abs(r.direct - r.level_integral) / scale : 0.0;
  return r;
}

namespace {

// Level energy as a function of t through sorted edge endpoints:
// L(t) = sum w [min < t] - sum w [max < t].
class LevelProfile {
 public:
  LevelProfile(const ScalarField& w, const EdgeSet& edges, const DomainMask& omega) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double wt = attribution(omega, edges.p[e], edges.q[e]) * edges.weight[e];
      if (wt == 0.0) continue;
      const double a = w[edges.p[e]], b = w[edges.q[e]];
      if (a == b) continue;
      mins_.push_back({std::min(a, b), wt});
      maxs_.push_back({std::max(a, b), wt});
    }
    prepare(mins_, min_prefix_);
    prepare(maxs_, max_prefix_);
  }

  double at(double t) const { return below(mins_, min_prefix_, t) - below(maxs_, max_prefix_, t); }

  // Candidate representatives of every constant piece meeting [a, b].
  std::vector<double> candidates(double a, double b) const {
    std::vector<double> c{a, b};
    for (const auto& [v, wt] : maxs_)
      if (v > a && v <= b) c.push_back(v);
    for (const auto& [v, wt] : mins_)
      if (v > a && v <= b) c.push_back(v);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
  }

 private:
  using Entry = std::pair<double, double>;
  static void prepare(std::vector<Entry>& v, std::vector<double>& prefix) {
    std::sort(v.begin(), v.end());
    prefix.assign(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i].second;
  }
  static double below(const std::vector<Entry>& v, const std::vector<double>& prefix, double t) {
    const auto it = std::lower_bound(v.begin(), v.end(), t, [](const Entry& e, double x) { return e.first < x; });
    return prefix[static_cast<std::size_t>(it - v.begin())];
  }

  std::vector<Entry> mins_, maxs_;
  std::vector<double> min_prefix_, max_prefix_;
};

}  // namespace

QuantizeResult coarea_quantize(const ScalarField& w, const LabelSet& labels, const Density& psi, const DomainMask& omega, double eps, int order) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0,1)");
  const Grid& g = w.grid;
  const std::size_t M = labels.size();
  ScalarField clamped(g);
  for (std::size_t k = 0; k < g.size(); ++k) clamped[k] = std::clamp(w[k], labels[0], labels[M - 1]);
  const EdgeSet edges = stencil_edges(g, psi, order, &omega);
  const LevelProfile profile(clamped, edges, omega);
  const double theta = labels.theta();

  QuantizeResult r;
  r.energy_w = anisotropic_energy_real(clamped, edges, omega);
  for (std::size_t i = 1; i < M; ++i) {
    ThresholdCheck c;
    c.lo = labels[i - 1] + 0.5 * eps * theta;
    c.hi = labels[i] - 0.5 * eps * theta;
    double best = std::numeric_limits<double>::infinity();
    for (double t : profile.candidates(c.lo, c.hi)) {
      const double v = profile.at(t);
      if (v < best) {
        best = v;
        c.t = t;
      }
    }
    c.level = best;
    c.gap_integral = level_energy_integral(clamped, edges, omega, labels[i - 1], labels[i]);
    c.lhs = (labels[i] - labels[i - 1] - eps * theta) * c.level;
    c.holds = c.lhs <= c.gap_integral * (1.0 + 1e-12) + 1e-300;
    r.thresholds.push_back(c.t);
    r.energy_v += (labels[i] - labels[i - 1]) * c.level;
    r.checks.push_back(c);
  }
  r.v = LabelField(g, labels, 0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    int idx = 0;
    for (std::size_t i = 0; i + 1 < M; ++i)
      if (clamped[k] >= r.thresholds[i]) idx = static_cast<int>(i + 1);
    r.v.index[k] = idx;
  }
  r.energy_ratio = r.energy_w > 0.0 ? r.energy_v / r.energy_w : 1.0;
  r.guarantee_holds = (1.0 - eps) * r.energy_v <= r.energy_w * (1.0 + 1e-12) + 1e-300;
  return r;
}

LabelField extend_label_field(const LabelField& u, const DomainMask& omega, int pad_label) {
  if (pad_label < 0 || static_cast<std::size_t>(pad_label) >= u.labels.size()) throw std::invalid_argument("pad label outside the label set");
  if (!omega.grid.same_layout(u.grid)) throw std::invalid_argument("mask grid differs from field grid");
  LabelField out = u;
  for (std::size_t k = 0; k < u.grid.size(); ++k)
    if (!omega.contains(k)) out.index[k] = pad_label;
  return out;
}

}  // namespace fracvar
