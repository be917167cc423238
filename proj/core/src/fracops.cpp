#include "fracvar/fracops.hpp"

#include "fracvar/fft.hpp"
#include "fracvar/kernels.hpp"
#include "fracvar/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace fracvar {

namespace {

// kind 0: potential table (param = alpha, shift_axis = -1/0/1)
// kind 1: gradient moment table (param = s, comp 0..5 = w0x, w0y, bxx, bxy, byx, byy)
struct TableKey {
  int kind = 0;
  int comp = 0;
  double param = 0.0;
  int shift_axis = -1;
  int near = 3;
  int n = 2;
  std::array<int, 2> shape{1, 1};
  double padding = 2.0;

  auto tie() const { return std::tie(kind, comp, param, shift_axis, near, n, shape, padding); }
  bool operator<(const TableKey& o) const { return tie() < o.tie(); }
};

struct ConvolverKey {
  int n;
  std::array<int, 2> shape;
  double padding;
  bool operator<(const ConvolverKey& o) const { return std::tie(n, shape, padding) < std::tie(o.n, o.shape, o.padding); }
};

// Process-wide cache of kernel tables and their spectra, bounded by a byte budget.
class KernelCache {
 public:
  static KernelCache& instance() {
    static KernelCache c;
    return c;
  }

  std::shared_ptr<const FftConvolver> convolver(int n, std::array<int, 2> shape, double padding) {
    std::lock_guard<std::mutex> lock(mutex_);
    const ConvolverKey key{n, shape, padding};
    auto it = convolvers_.find(key);
    if (it != convolvers_.end()) return it->second;
    if (convolvers_.size() > 16) convolvers_.clear();
    auto c = std::make_shared<const FftConvolver>(n, shape, padding);
    convolvers_.emplace(key, c);
    return c;
  }

  std::shared_ptr<const OffsetTable> table(const TableKey& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(key);
    if (it != tables_.end()) {
      touch(it->second.stamp);
      return it->second.table;
    }
    build_locked(key, false);
    return tables_.at(key).table;
  }

  std::shared_ptr<const Spectrum> spectrum(const TableKey& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = spectra_.find(key);
    if (it != spectra_.end()) {
      touch(it->second.stamp);
      return it->second.spectrum;
    }
    build_locked(key, true);
    return spectra_.at(key).spectrum;
  }

 private:
  struct TableEntry {
    std::shared_ptr<const OffsetTable> table;
    std::size_t bytes = 0;
    std::size_t stamp = 0;
  };
  struct SpectrumEntry {
    std::shared_ptr<const Spectrum> spectrum;
    std::size_t bytes = 0;
    std::size_t stamp = 0;
  };

  void touch(std::size_t& stamp) { stamp = ++clock_; }

  void build_locked(const TableKey& key, bool want_spectrum) {
    std::vector<std::pair<TableKey, OffsetTable>> built;
    if (key.kind == 0) {
      Point shift{0.0, 0.0};
      if (key.shift_axis >= 0) shift[static_cast<std::size_t>(key.shift_axis)] = 0.5;
      built.emplace_back(key, kernels::potential_table(key.n, key.shape, key.param, shift, key.near));
    } else {
      kernels::GradientTables g = kernels::gradient_tables(key.n, key.shape, key.param, key.near);
      OffsetTable* parts[6] = {&g.w0[0], &g.w0[1], &g.b[0][0], &g.b[0][1], &g.b[1][0], &g.b[1][1]};
      for (int c = 0; c < 6; ++c) {
        if (key.n == 1 && c != 0 && c != 2) continue;
        TableKey k = key;
        k.comp = c;
        built.emplace_back(k, std::move(*parts[c]));
      }
    }
    std::shared_ptr<const FftConvolver> conv;
    if (want_spectrum) {
      // Convolver lookup without re-locking.
      const ConvolverKey ck{key.n, key.shape, key.padding};
      auto it = convolvers_.find(ck);
      if (it == convolvers_.end()) it = convolvers_.emplace(ck, std::make_shared<const FftConvolver>(key.n, key.shape, key.padding)).first;
      conv = it->second;
    }
    for (auto& [k, t] : built) {
      if (want_spectrum) {
        auto spec = std::make_shared<const Spectrum>(conv->kernel_spectrum(t));
        SpectrumEntry e{spec, spec->size() * sizeof(std::complex<double>), ++clock_};
        bytes_ += e.bytes;
        spectra_[k] = std::move(e);
      } else {
        auto tab = std::make_shared<const OffsetTable>(std::move(t));
        TableEntry e{tab, tab->data.size() * sizeof(double), ++clock_};
        bytes_ += e.bytes;
        tables_[k] = std::move(e);
      }
    }
    evict_locked(key);
  }

  void evict_locked(const TableKey& keep) {
    while (bytes_ > budget_) {
      std::size_t oldest = static_cast<std::size_t>(-1);
      int where = -1;
      TableKey victim;
      for (const auto& [k, e] : spectra_)
        if (e.stamp < oldest && !(!(k < keep) && !(keep < k))) {
          oldest = e.stamp;
          victim = k;
          where = 0;
        }
      for (const auto& [k, e] : tables_)
        if (e.stamp < oldest && !(!(k < keep) && !(keep < k))) {
          oldest = e.stamp;
          victim = k;
          where = 1;
        }
      if (where < 0) break;
      if (where == 0) {
        bytes_ -= spectra_[victim].bytes;
        spectra_.erase(victim);
      } else {
        bytes_ -= tables_[victim].bytes;
        tables_.erase(victim);
      }
    }
  }

  std::mutex mutex_;
  std::map<ConvolverKey, std::shared_ptr<const FftConvolver>> convolvers_;
  std::map<TableKey, TableEntry> tables_;
  std::map<TableKey, SpectrumEntry> spectra_;
  std::size_t bytes_ = 0;
  std::size_t clock_ = 0;
  std::size_t budget_ = std::size_t{640} << 20;
};

TableKey potential_key(const Grid& g, double alpha, int shift_axis, const FracOperatorConfig& cfg) {
  TableKey k;
  k.kind = 0;
  k.param = alpha;
  k.shift_axis = shift_axis;
  k.near = cfg.quadrature_cutoff;
  k.n = g.n;
  k.shape = g.shape;
  k.padding = cfg.fft_padding_factor;
  return k;
}

// comp: 0 w0x, 1 w0y, 2 bxx, 3 bxy, 4 byx, 5 byy
TableKey gradient_key(const Grid& g, double s, int comp, const FracOperatorConfig& cfg) {
  TableKey k;
  k.kind = 1;
  k.comp = comp;
  k.param = s;
  k.near = cfg.quadrature_cutoff;
  k.n = g.n;
  k.shape = g.shape;
  k.padding = cfg.fft_padding_factor;
  return k;
}

int w0_comp(int i) { return i; }
int b_comp(int i, int j) { return 2 + 2 * i + j; }

struct Term {
  TableKey key;
  const std::vector<double>* field;
  double factor;
};

// out = sum_t factor_t * (T_t applied to field_t)
std::vector<double> evaluate(const Grid& g, const std::vector<Term>& terms, const FracOperatorConfig& cfg) {
  std::vector<double> out(g.size(), 0.0);
  auto& cache = KernelCache::instance();
  if (cfg.engine == LatticeEngine::Direct) {
    for (const auto& t : terms) {
      auto table = cache.table(t.key);
      const std::vector<double> r = convolve_direct(*table, *t.field);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += t.factor * r[k];
    }
    return out;
  }
  auto conv = cache.convolver(g.n, g.shape, cfg.fft_padding_factor);
  std::map<const std::vector<double>*, Spectrum> fields;
  Spectrum acc(conv->spectrum_size(), {0.0, 0.0});
  for (const auto& t : terms) {
    auto it = fields.find(t.field);
    if (it == fields.end()) it = fields.emplace(t.field, conv->forward(*t.field)).first;
    auto spec = cache.spectrum(t.key);
    FftConvolver::multiply_add(acc, *spec, it->second, t.factor);
  }
  conv->inverse_add(acc, out, 1.0);
  return out;
}

double mu_with_fault(const Grid& g, const FracOperatorConfig& cfg) { return mu_s(g.n, cfg.s) * cfg.mu_fault; }

void require_same(const Grid& a, const Grid& b) {
  if (!a.same_layout(b)) throw std::invalid_argument("fields live on different grids");
}

std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] * b[k];
  return r;
}

}  // namespace

void FracOperatorConfig::validate() const {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("s must lie in (0,1)");
  if (quadrature_cutoff < 1) throw std::invalid_argument("quadrature_cutoff must be at least 1");
  if (!(tail_radius_factor > 1.0)) throw std::invalid_argument("tail_radius_factor must exceed 1");
  if (fft_padding_factor < 2.0) throw std::invalid_argument("fft_padding_factor must be at least 2");
  if (!(mollifier_cells > 0.0)) throw std::invalid_argument("mollifier width must be positive");
  if (!(tail_tolerance > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
  if (!(mu_fault > 0.0) || !std::isfinite(mu_fault)) throw std::invalid_argument("mu_fault must be positive");
}

MeasureModel parse_measure_model(const std::string& name) {
  if (name == "faces") return MeasureModel::Faces;
  if (name == "mollified") return MeasureModel::Mollified;
  throw std::invalid_argument("unknown measure model '" + name + "'");
}

std::string to_string(MeasureModel m) { return m == MeasureModel::Faces ? "faces" : "mollified"; }

VectorField central_gradient(const ScalarField& f) {
  const Grid& g = f.grid;
  VectorField out(g);
  const double inv = 0.5 / g.h;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const double xp = i + 1 < g.nx() ? f.values[g.index(i + 1, j)] : 0.0;
      const double xm = i > 0 ? f.values[g.index(i - 1, j)] : 0.0;
      out.comp[0][k] = (xp - xm) * inv;
      if (g.n == 2) {
        const double yp = j + 1 < g.ny() ? f.values[g.index(i, j + 1)] : 0.0;
        const double ym = j > 0 ? f.values[g.index(i, j - 1)] : 0.0;
        out.comp[1][k] = (yp - ym) * inv;
      }
    }
  return out;
}

double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (double v : f.values) acc += std::pow(std::abs(v), p);
  return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

double lp_norm(const VectorField& f, double p) {
  ScalarField m(f.grid);
  for (std::size_t k = 0; k < m.values.size(); ++k) m[k] = f.magnitude(k);
  return lp_norm(m, p);
}

double inner(const ScalarField& a, const ScalarField& b) {
  require_same(a.grid, b.grid);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) acc += a[k] * b[k];
  return acc * a.grid.cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
  require_same(a.grid, b.grid);
  double acc = 0.0;
  for (int d = 0; d < a.grid.n; ++d)
    for (std::size_t k = 0; k < a.comp[d].size(); ++k) acc += a.comp[d][k] * b.comp[d][k];
  return acc * a.grid.cell_volume();
}

ScalarField riesz_potential_field(const ScalarField& f, double alpha, const FracOperatorConfig& cfg) {
  cfg.validate();
  const Grid& g = f.grid;
  if (!(alpha > 0.0 && alpha < g.n)) throw std::domain_error("alpha must lie in (0,n)");
  ScalarField out(g);
  out.values = evaluate(g, {{potential_key(g, alpha, -1, cfg), &f.values, std::pow(g.h, alpha)}}, cfg);
  return out;
}

VectorField riesz_potential_field(const VectorField& f, double alpha, const FracOperatorConfig& cfg) {
  cfg.validate();
  const Grid& g = f.grid;
  if (!(alpha > 0.0 && alpha < g.n)) throw std::domain_error("alpha must lie in (0,n)");
  VectorField out(g);
  for (int d = 0; d < g.n; ++d)
    out.comp[d] = evaluate(g, {{potential_key(g, alpha, -1, cfg), &f.comp[d], std::pow(g.h, alpha)}}, cfg);
  return out;
}

std::vector<Point> riesz_potential_measure(const FaceMeasure& mu, double alpha, const std::vector<Point>& points) {
  const Grid& g = mu.grid;
  if (!(alpha > 0.0 && alpha < g.n)) throw std::domain_error("alpha must lie in (0,n)");
  const double ga = gamma_alpha(g.n, alpha);
  const double e = 0.5 * (alpha - g.n);
  std::vector<Point> out(points.size(), Point{0.0, 0.0});
  for (std::size_t p = 0; p < points.size(); ++p) {
    Point acc{0.0, 0.0};
    for (const auto& a : mu.atoms) {
      Point x = points[p];
      double dx = x[0] - a.position[0];
      double dy = g.n == 2 ? x[1] - a.position[1] : 0.0;
      if (dx * dx + dy * dy < 1e-24 * g.h * g.h) {
        if (a.axis == 0) dx += 0.5 * g.h;
        else dy += 0.5 * g.h;
      }
      acc[static_cast<std::size_t>(a.axis)] += a.weight * std::pow(dx * dx + dy * dy, e);
    }
    out[p] = {acc[0] / ga, acc[1] / ga};
  }
  return out;
}

VectorField riesz_potential_measure(const FaceMeasure& mu, double alpha, const Grid& eval) {
  std::vector<Point> pts(eval.size());
  for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = eval.center(k);
  const std::vector<Point> v = riesz_potential_measure(mu, alpha, pts);
  VectorField out(eval);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    out.comp[0][k] = v[k][0];
    out.comp[1][k] = v[k][1];
  }
  return out;
}

VectorField frac_gradient_direct(const ScalarField& psi, const FracOperatorConfig& cfg) {
  cfg.validate();
  const Grid& g = psi.grid;
  const VectorField grad = central_gradient(psi);
  const double mu = mu_with_fault(g, cfg);
  const double f0 = mu * std::pow(g.h, -cfg.s);
  const double f1 = mu * std::pow(g.h, 1.0 - cfg.s);
  VectorField out(g);
  for (int i = 0; i < g.n; ++i) {
    std::vector<Term> terms{{gradient_key(g, cfg.s, w0_comp(i), cfg), &psi.values, f0}};
    for (int j = 0; j < g.n; ++j) terms.push_back({gradient_key(g, cfg.s, b_comp(j, i), cfg), &grad.comp[j], f1});
    out.comp[i] = evaluate(g, terms, cfg);
  }
  return out;
}

VectorField frac_gradient_potential(const ScalarField& psi, const FracOperatorConfig& cfg) {
  // I^{1-s} psi does not vanish at the box edge: evaluate it one cell beyond before differencing.
  const Grid& g = psi.grid;
  const int py = g.n == 2 ? 1 : 0;
  const Grid w = Grid::make(g.n, {g.nx() + 2, g.ny() + 2 * py}, g.h, {g.origin[0] - g.h, g.origin[1] - py * g.h});
  ScalarField padded(w);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) padded.at(i + 1, j + py) = psi.at(i, j);
  const ScalarField pot = riesz_potential_field(padded, 1.0 - cfg.s, cfg);
  VectorField out(g);
  const double inv = 0.5 / g.h;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      out.comp[0][k] = (pot.at(i + 2, j + py) - pot.at(i, j + py)) * inv;
      if (g.n == 2) out.comp[1][k] = (pot.at(i + 1, j + 2) - pot.at(i + 1, j)) * inv;
    }
  return out;
}

VectorField frac_gradient_potential_of_gradient(const ScalarField& psi, const FracOperatorConfig& cfg) {
  return riesz_potential_field(central_gradient(psi), 1.0 - cfg.s, cfg);
}

ScalarField frac_divergence(const VectorField& Psi, const FracOperatorConfig& cfg) {
  cfg.validate();
  const Grid& g = Psi.grid;
  const double mu = mu_s(g.n, cfg.s);
  const double f0 = mu * std::pow(g.h, -cfg.s);
  const double f1 = mu * std::pow(g.h, 1.0 - cfg.s);
  std::vector<VectorField> grads;
  for (int i = 0; i < g.n; ++i) {
    ScalarField c(g);
    c.values = Psi.comp[i];
    grads.push_back(central_gradient(c));
  }
  std::vector<Term> terms;
  for (int i = 0; i < g.n; ++i) {
    terms.push_back({gradient_key(g, cfg.s, w0_comp(i), cfg), &Psi.comp[i], f0});
    for (int j = 0; j < g.n; ++j) terms.push_back({gradient_key(g, cfg.s, b_comp(j, i), cfg), &grads[i].comp[j], f1});
  }
  ScalarField out(g);
  out.values = evaluate(g, terms, cfg);
  return out;
}

VectorField nl_gradient(const ScalarField& psi, const ScalarField& phi, const FracOperatorConfig& cfg) {
  cfg.validate();
  require_same(psi.grid, phi.grid);
  const Grid& g = psi.grid;
  const double f0 = mu_s(g.n, cfg.s) * std::pow(g.h, -cfg.s);
  const std::vector<double> prod = product(psi.values, phi.values);
  VectorField out(g);
  for (int i = 0; i < g.n; ++i) {
    const TableKey key = gradient_key(g, cfg.s, w0_comp(i), cfg);
    const std::vector<double> a = evaluate(g, {{key, &prod, f0}}, cfg);
    const std::vector<double> wpsi = evaluate(g, {{key, &psi.values, f0}}, cfg);
    const std::vector<double> wphi = evaluate(g, {{key, &phi.values, f0}}, cfg);
    for (std::size_t k = 0; k < g.size(); ++k) out.comp[i][k] = a[k] - phi[k] * wpsi[k] - psi[k] * wphi[k];
  }
  return out;
}

ScalarField nl_divergence(const VectorField& Psi, const ScalarField& phi, const FracOperatorConfig& cfg) {
  cfg.validate();
  require_same(Psi.grid, phi.grid);
  const Grid& g = phi.grid;
  const double f0 = mu_s(g.n, cfg.s) * std::pow(g.h, -cfg.s);
  ScalarField out(g);
  for (int i = 0; i < g.n; ++i) {
    const TableKey key = gradient_key(g, cfg.s, w0_comp(i), cfg);
    const std::vector<double> prod = product(Psi.comp[i], phi.values);
    const std::vector<double> a = evaluate(g, {{key, &prod, f0}}, cfg);
    const std::vector<double> wPsi = evaluate(g, {{key, &Psi.comp[i], f0}}, cfg);
    const std::vector<double> wphi = evaluate(g, {{key, &phi.values, f0}}, cfg);
    for (std::size_t k = 0; k < g.size(); ++k) out[k] += a[k] - phi[k] * wPsi[k] - Psi.comp[i][k] * wphi[k];
  }
  return out;
}

DualityReport duality_residual(const ScalarField& psi, const VectorField& Psi, const FracOperatorConfig& cfg) {
  require_same(psi.grid, Psi.grid);
  DualityReport r;
  r.gradient_pairing = inner(frac_gradient_direct(psi, cfg), Psi);
  r.divergence_pairing = inner(psi, frac_divergence(Psi, cfg));
  r.residual = std::abs(r.gradient_pairing + r.divergence_pairing);
  r.relative = std::abs(r.gradient_pairing) > 0.0 ? r.residual / std::abs(r.gradient_pairing) : r.residual;
  return r;
}

namespace {

IdentityReport relative_l2(const VectorField& residual, const VectorField& reference) {
  IdentityReport r;
  r.residual_l2 = lp_norm(residual, 2.0);
  r.reference_l2 = lp_norm(reference, 2.0);
  r.relative = r.reference_l2 > 0.0 ? r.residual_l2 / r.reference_l2 : r.residual_l2;
  return r;
}

}  // namespace

IdentityReport leibniz_residual(const ScalarField& psi, const ScalarField& phi, const FracOperatorConfig& cfg) {
  require_same(psi.grid, phi.grid);
  const Grid& g = psi.grid;
  ScalarField prod(g);
  prod.values = product(psi.values, phi.values);
  const VectorField lhs = frac_gradient_direct(prod, cfg);
  const VectorField gphi = frac_gradient_direct(phi, cfg);
  const VectorField gpsi = frac_gradient_direct(psi, cfg);
  const VectorField nl = nl_gradient(psi, phi, cfg);
  VectorField res(g);
  for (int d = 0; d < g.n; ++d)
    for (std::size_t k = 0; k < g.size(); ++k)
      res.comp[d][k] = lhs.comp[d][k] - psi[k] * gphi.comp[d][k] - phi[k] * gpsi.comp[d][k] - nl.comp[d][k];
  return relative_l2(res, lhs);
}

IdentityReport leibniz_divergence_residual(const VectorField& Psi, const ScalarField& phi, const FracOperatorConfig& cfg) {
  require_same(Psi.grid, phi.grid);
  const Grid& g = phi.grid;
  VectorField prod(g);
  for (int d = 0; d < g.n; ++d) prod.comp[d] = product(Psi.comp[d], phi.values);
  const ScalarField lhs = frac_divergence(prod, cfg);
  const VectorField gphi = frac_gradient_direct(phi, cfg);
  const ScalarField dPsi = frac_divergence(Psi, cfg);
  const ScalarField nl = nl_divergence(Psi, phi, cfg);
  VectorField res(g), ref(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    double dotv = 0.0;
    for (int d = 0; d < g.n; ++d) dotv += Psi.comp[d][k] * gphi.comp[d][k];
    res.comp[0][k] = lhs[k] - dotv - phi[k] * dPsi[k] - nl[k];
    ref.comp[0][k] = lhs[k];
  }
  return relative_l2(res, ref);
}

IdentityReport cross_path_residual(const ScalarField& psi, const FracOperatorConfig& cfg) {
  const VectorField a = frac_gradient_direct(psi, cfg);
  const VectorField b = frac_gradient_potential(psi, cfg);
  VectorField d(psi.grid);
  for (int c = 0; c < psi.grid.n; ++c)
    for (std::size_t k = 0; k < psi.grid.size(); ++k) d.comp[c][k] = a.comp[c][k] - b.comp[c][k];
  return relative_l2(d, b);
}

EstimateReport lp_estimate_check(const ScalarField& psi, double p, const FracOperatorConfig& cfg) {
  if (!(p == 1.0 || p == 2.0 || std::isinf(p))) throw std::invalid_argument("p must be 1, 2 or infinity");
  const int n = psi.grid.n;
  const double s = cfg.s;
  EstimateReport r;
  r.constant = 2.0 * omega_n(n) * mu_s(n, s) / (s * (1.0 - s) * std::pow(2.0, s));
  r.lhs = lp_norm(frac_gradient_direct(psi, cfg), p);
  const double a = lp_norm(psi, p);
  const double b = lp_norm(central_gradient(psi), p);
  r.rhs = (a > 0.0 && b > 0.0) ? r.constant * std::pow(a, 1.0 - s) * std::pow(b, s) : 0.0;
  r.holds = r.lhs <= 1.05 * r.rhs || r.lhs == 0.0;
  return r;
}

NlEstimateReport nl_estimate_check(const ScalarField& psi, const ScalarField& phi, const FracOperatorConfig& cfg) {
  const int n = psi.grid.n;
  const double s = cfg.s;
  NlEstimateReport r;
  r.constant = 4.0 * omega_n(n) * mu_s(n, s) / (s * (1.0 - s) * std::pow(2.0, s));
  r.lhs = lp_norm(nl_gradient(psi, phi, cfg), std::numeric_limits<double>::infinity());
  const double a = lp_norm(psi, std::numeric_limits<double>::infinity());
  const double b = lp_norm(phi, std::numeric_limits<double>::infinity());
  const double c = lp_norm(central_gradient(phi), std::numeric_limits<double>::infinity());
  r.rhs_printed = r.constant * a * std::pow(b, s) * std::pow(c, 1.0 - s);
  r.rhs_scaled = r.constant * a * std::pow(b, 1.0 - s) * std::pow(c, s);
  r.holds_printed = r.lhs <= 1.05 * r.rhs_printed || r.lhs == 0.0;
  r.holds_scaled = r.lhs <= 1.05 * r.rhs_scaled || r.lhs == 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Fractional variation of label fields

namespace {

double extension_value(const LabelField& u, bool require_unanimous) {
  const Grid& g = u.grid;
  std::map<int, std::size_t> counts;
  auto add = [&](int i, int j) { ++counts[u.index[g.index(i, j)]]; };
  if (g.n == 1) {
    add(0, 0);
    add(g.nx() - 1, 0);
  } else {
    for (int i = 0; i < g.nx(); ++i) {
      add(i, 0);
      add(i, g.ny() - 1);
    }
    for (int j = 1; j + 1 < g.ny(); ++j) {
      add(0, j);
      add(g.nx() - 1, j);
    }
  }
  if (require_unanimous && counts.size() > 1)
    throw std::invalid_argument("label field has conflicting boundary labels; whole-space query needs a constant exterior (enlarge the box)");
  int best = counts.begin()->first;
  for (const auto& [l, c] : counts)
    if (c > counts[best]) best = l;
  return u.labels[static_cast<std::size_t>(best)];
}

std::vector<double> gaussian_weights(double sigma_cells) {
  const int r = static_cast<int>(std::ceil(4.0 * sigma_cells));
  std::vector<double> w(static_cast<std::size_t>(2 * r + 1));
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    w[static_cast<std::size_t>(k + r)] = std::exp(-0.5 * k * k / (sigma_cells * sigma_cells));
    sum += w[static_cast<std::size_t>(k + r)];
  }
  for (auto& v : w) v /= sum;
  return w;
}

ScalarField mollify(const ScalarField& f, double sigma_cells) {
  const Grid& g = f.grid;
  const std::vector<double> w = gaussian_weights(sigma_cells);
  const int r = static_cast<int>(w.size() / 2);
  ScalarField tmp(g), out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int ii = i + k;
        if (ii >= 0 && ii < g.nx()) acc += w[static_cast<std::size_t>(k + r)] * f.at(ii, j);
      }
      tmp.at(i, j) = acc;
    }
  if (g.n == 1) return tmp;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) {
        const int jj = j + k;
        if (jj >= 0 && jj < g.ny()) acc += w[static_cast<std::size_t>(k + r)] * tmp.at(i, jj);
      }
      out.at(i, j) = acc;
    }
  return out;
}

// Density of I^alpha applied to the jump measure of the real field v (zero outside the grid).
VectorField measure_potential(const ScalarField& v, double alpha, MeasureModel model, const FracOperatorConfig& cfg) {
  const Grid& g = v.grid;
  VectorField out(g);
  if (model == MeasureModel::Mollified) {
    const VectorField grad = central_gradient(v);
    for (int d = 0; d < g.n; ++d)
      out.comp[d] = evaluate(g, {{potential_key(g, alpha, -1, cfg), &grad.comp[d], std::pow(g.h, alpha)}}, cfg);
    return out;
  }
  // Face atoms indexed by their low cell. The caller pads with zeros, so the faces before the
  // first cell carry no weight.
  const double area = g.face_area();
  const double avg = std::pow(g.h, alpha - g.n);
  for (int d = 0; d < g.n; ++d) {
    std::vector<double> w(g.size(), 0.0);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const int ii = i + (d == 0 ? 1 : 0), jj = j + (d == 1 ? 1 : 0);
        const double next = (ii < g.nx() && jj < g.ny()) ? v.at(ii, jj) : 0.0;
        w[g.index(i, j)] = (next - v.at(i, j)) * area;
      }
    std::vector<Term> terms{{potential_key(g, alpha, d, cfg), &w, avg}};
    out.comp[d] = evaluate(g, terms, cfg);
  }
  return out;
}

ScalarField restrict_to_coarse(const ScalarField& fine) {
  // Block-average 2^n cells into the central half of a grid twice as coarse.
  const Grid& g = fine.grid;
  Grid c = g;
  c.h = 2.0 * g.h;
  const double cx = g.origin[0] + 0.5 * g.nx() * g.h;
  const double cy = g.origin[1] + 0.5 * g.ny() * g.h;
  c.origin = {cx - 0.5 * c.nx() * c.h, g.n == 2 ? cy - 0.5 * c.ny() * c.h : 0.0};
  ScalarField out(c);
  const int ox = g.nx() / 4, oy = g.n == 2 ? g.ny() / 4 : 0;
  const double w = g.n == 2 ? 0.25 : 0.5;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out.at(ox + i / 2, oy + (g.n == 2 ? j / 2 : 0)) += w * fine.at(i, j);
  return out;
}

bool in_central_half(const Grid& g, int i, int j) {
  const bool x = i >= g.nx() / 4 && i < 3 * g.nx() / 4;
  const bool y = g.n == 1 || (j >= g.ny() / 4 && j < 3 * g.ny() / 4);
  return x && y;
}

}  // namespace

FracVariationResult frac_variation(const LabelField& u, const std::optional<DomainMask>& omega, const FracOperatorConfig& cfg) {
  cfg.validate();
  u.validate();
  const Grid& g = u.grid;
  const bool whole_space = !omega.has_value();
  if (omega && !omega->grid.same_layout(g)) throw std::invalid_argument("mask grid differs from field grid");
  FracVariationResult res;
  res.extension_value = extension_value(u, whole_space);
  const double alpha = 1.0 - cfg.s;

  // Working grid: padding for the exterior faces and the mollifier, shape divisible by 4.
  int pad = 2;
  if (cfg.measure == MeasureModel::Mollified) pad += static_cast<int>(std::ceil(4.0 * cfg.mollifier_cells));
  auto round4 = [](int v) { return (v + 3) / 4 * 4; };
  std::array<int, 2> shape{round4(g.nx() + 2 * pad), g.n == 2 ? round4(g.ny() + 2 * pad) : 1};
  const int offx = (shape[0] - g.nx()) / 2;
  const int offy = g.n == 2 ? (shape[1] - g.ny()) / 2 : 0;
  const Grid w = Grid::make(g.n, shape, g.h, {g.origin[0] - offx * g.h, g.n == 2 ? g.origin[1] - offy * g.h : 0.0});
  ScalarField v(w);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) v.at(i + offx, j + offy) = u.value(g.index(i, j)) - res.extension_value;
  if (cfg.measure == MeasureModel::Mollified) v = mollify(v, cfg.mollifier_cells);

  const VectorField dens = measure_potential(v, alpha, cfg.measure, cfg);
  res.density = VectorField(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      for (int d = 0; d < g.n; ++d) res.density.comp[d][g.index(i, j)] = dens.comp[d][w.index(i + offx, j + offy)];

  const double vol = g.cell_volume();
  if (!whole_space) {
    double total = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (omega->contains(k)) total += res.density.magnitude(k) * vol;
    res.total_on_mask = total;
    return res;
  }

  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) total += dens.magnitude(k) * vol;
  const int max_levels = std::max(1, static_cast<int>(std::floor(std::log2(cfg.tail_radius_factor))));
  ScalarField level = v;
  double last_shell = 0.0;
  int levels = 1;
  for (int k = 1; k <= max_levels; ++k) {
    level = restrict_to_coarse(level);
    const Grid& lg = level.grid;
    const VectorField ld = measure_potential(level, alpha, cfg.measure, cfg);
    double shell = 0.0;
    for (int j = 0; j < lg.ny(); ++j)
      for (int i = 0; i < lg.nx(); ++i)
        if (!in_central_half(lg, i, j)) shell += ld.magnitude(lg.index(i, j)) * lg.cell_volume();
    total += shell;
    last_shell = shell;
    levels = k + 1;
    if (shell < cfg.tail_tolerance * total) break;
  }
  res.total_on_mask = total;
  res.levels = levels;
  res.tail_estimate = levels > 1 ? last_shell / (std::pow(2.0, cfg.s) - 1.0) : 0.0;
  return res;
}

double measure_variation_in_ball(const LabelField& u, const Point& center, double rad, const FracOperatorConfig& cfg) {
  const Grid& g = u.grid;
  auto inside = [&](const Point& p) {
    const double dx = p[0] - center[0], dy = g.n == 2 ? p[1] - center[1] : 0.0;
    return dx * dx + dy * dy < rad * rad;
  };
  if (cfg.measure == MeasureModel::Faces) {
    double tv = 0.0;
    for (const auto& a : discrete_Du(u).atoms)
      if (inside(a.position)) tv += std::abs(a.weight);
    return tv;
  }
  const double ext = extension_value(u, false);
  const int pad = 2 + static_cast<int>(std::ceil(4.0 * cfg.mollifier_cells));
  const Grid w = Grid::make(g.n, {g.nx() + 2 * pad, g.n == 2 ? g.ny() + 2 * pad : 1}, g.h,
                            {g.origin[0] - pad * g.h, g.n == 2 ? g.origin[1] - pad * g.h : 0.0});
  ScalarField v(w);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) v.at(i + pad, j + (g.n == 2 ? pad : 0)) = u.value(g.index(i, j)) - ext;
  const VectorField grad = central_gradient(mollify(v, cfg.mollifier_cells));
  double tv = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (inside(w.center(k))) tv += grad.magnitude(k) * w.cell_volume();
  return tv;
}

V1sReport v1s_constants(int n, double R, double s) {
  V1sReport r;
  const double om = omega_n(n);
  const double mu = mu_s(n, s);
  r.c_variation = 2.0 * om * std::pow(R, 1.0 - s) * mu / ((1.0 - s) * std::pow(2.0, s));
  r.c_sup = std::pow(2.0, 1.0 + s) * om * om * std::pow(R, n - s) * mu * gamma_fn(1.0 - s) / s;
  r.limit_variation = n;
  r.limit_sup = 4.0 * n * om * std::pow(R, n - 1);
  return r;
}

V1sReport v1s_estimate_check(const LabelField& u, double R, const Point& center, const FracOperatorConfig& cfg) {
  const Grid& g = u.grid;
  V1sReport r = v1s_constants(g.n, R, cfg.s);
  DomainMask ball(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    const double dx = c[0] - center[0], dy = g.n == 2 ? c[1] - center[1] : 0.0;
    ball.inside[k] = dx * dx + dy * dy < R * R ? 1 : 0;
  }
  bool constant = true;
  for (std::size_t k = 1; k < g.size(); ++k) constant = constant && u.index[k] == u.index[0];
  for (std::size_t k = 0; k < g.size(); ++k) r.sup_norm = std::max(r.sup_norm, std::abs(u.value(k)));
  if (constant) {
    r.rhs = r.c_sup * r.sup_norm;
    return r;
  }
  r.lhs = frac_variation(u, ball, cfg).total_on_mask;
  r.variation_3r = measure_variation_in_ball(u, center, 3.0 * R, cfg);
  r.rhs = r.c_variation * r.variation_3r + r.c_sup * r.sup_norm;
  r.holds = r.lhs <= 1.05 * r.rhs;
  return r;
}

}  // namespace fracvar
