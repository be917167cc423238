#include "fracvar/approx.hpp"

#include "fracvar/fft.hpp"
#include "fracvar/fracops.hpp"
#include "fracvar/specfun.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fracvar {

namespace {

// Samples on a (possibly periodic) lattice; each sample is a vector compared in max norm.
struct SampleLattice {
  int n = 1;
  int nx = 1, ny = 1;
  double h = 1.0;
  bool periodic = false;
  int width = 1;  // components per sample
  std::vector<double> data;

  const double* at(int i, int j) const { return &data[(static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j) * width]; }
};

double lattice_radius(const SampleLattice& s, double eta) {
  // No pair can differ by more than the per-component range.
  double range = 0.0;
  for (int c = 0; c < s.width; ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = static_cast<std::size_t>(c); k < s.data.size(); k += static_cast<std::size_t>(s.width)) {
      lo = std::min(lo, s.data[k]);
      hi = std::max(hi, s.data[k]);
    }
    range = std::max(range, hi - lo);
  }
  if (range <= eta) return 1.0;
  // Offsets up to length 1 in the half plane (|b(x+o) - b(x)| is symmetric in o).
  const int rx = std::min(static_cast<int>(std::floor(1.0 / s.h + 1e-9)), s.periodic ? s.nx : s.nx - 1);
  const int ry = s.n == 2 ? std::min(static_cast<int>(std::floor(1.0 / s.h + 1e-9)), s.periodic ? s.ny : s.ny - 1) : 0;
  std::vector<std::array<int, 2>> offsets;
  for (int dj = 0; dj <= ry; ++dj)
    for (int di = -rx; di <= rx; ++di) {
      if (dj == 0 && di <= 0) continue;
      const double len = std::hypot(di, dj) * s.h;
      if (len <= 1.0 + 1e-12) offsets.push_back({di, dj});
    }
  std::sort(offsets.begin(), offsets.end(), [](const auto& a, const auto& b) {
    const int la = a[0] * a[0] + a[1] * a[1], lb = b[0] * b[0] + b[1] * b[1];
    return la != lb ? la < lb : a < b;
  });
  for (const auto& o : offsets) {
    double worst = 0.0;
    for (int j = 0; j < s.ny && worst <= eta; ++j)
      for (int i = 0; i < s.nx; ++i) {
        int ii = i + o[0], jj = j + o[1];
        if (s.periodic) {
          ii = ((ii % s.nx) + s.nx) % s.nx;
          jj = ((jj % s.ny) + s.ny) % s.ny;
        } else if (ii < 0 || ii >= s.nx || jj < 0 || jj >= s.ny) {
          continue;
        }
        const double* a = s.at(i, j);
        const double* b = s.at(ii, jj);
        for (int c = 0; c < s.width; ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
        if (worst > eta) break;
      }
    if (worst > eta) return std::min(1.0, std::hypot(o[0], o[1]) * s.h);
  }
  return 1.0;
}

using VectorSampler = std::function<void(const Point&, double*)>;

struct RadiusEstimate {
  double r = 1.0;
  bool resolved = true;  // false: the radius shrank with the sampling (a jump) or hit the cap
};

RadiusEstimate refined_radius(const VectorSampler& f, int width, int n, const Point& lo, const Point& hi, double eta, bool periodic, int initial_cells) {
  const double Lx = hi[0] - lo[0], Ly = n == 2 ? hi[1] - lo[1] : 0.0;
  if (!(Lx > 0.0) || (n == 2 && !(Ly > 0.0))) throw std::invalid_argument("empty sampling box");
  const int cap = n == 1 ? (1 << 17) : 512;
  int collapsed = 0;
  int cells = std::max(8, initial_cells);
  double prev = -1.0, prev_h = 0.0, r = 1.0;
  for (int iter = 0; iter < 24; ++iter) {
    SampleLattice s;
    s.n = n;
    s.h = Lx / cells;
    s.nx = cells;
    s.ny = n == 2 ? std::max(1, static_cast<int>(std::lround(Ly / s.h))) : 1;
    s.periodic = periodic;
    s.width = width;
    s.data.resize(static_cast<std::size_t>(s.nx) * s.ny * width);
    for (int j = 0; j < s.ny; ++j)
      for (int i = 0; i < s.nx; ++i) {
        // Periodic lattices sample the left edge, others the cell centers.
        const double off = periodic ? 0.0 : 0.5;
        const Point x{lo[0] + (i + off) * s.h, n == 2 ? lo[1] + (j + off) * s.h : 0.0};
        f(x, &s.data[(static_cast<std::size_t>(i) + static_cast<std::size_t>(s.nx) * j) * width]);
      }
    r = lattice_radius(s, eta);
    if (s.h <= r / 8.0 && prev >= 0.0 && std::abs(r - prev) <= prev_h) return {r, true};
    if (cells >= cap) return {r, false};
    // A jump keeps the radius at the first lattice offset however fine the sampling.
    collapsed = r <= 1.5 * s.h ? collapsed + 1 : 0;
    if (collapsed >= 3) return {r, false};
    prev = r;
    prev_h = s.h;
    const int want = static_cast<int>(std::ceil(8.0 * Lx / r));
    cells = std::min(cap, std::max(2 * cells, want));
  }
  return {r, false};
}

double periodic_delta(double d, double p) {
  if (p <= 0.0) return 0.0;
  d = std::fmod(d, p);
  if (d > 0.5 * p) d -= p;
  if (d < -0.5 * p) d += p;
  return d;
}

}  // namespace

double radius_uniform_continuity(const ScalarField& b, double eta, bool periodic) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  SampleLattice s;
  s.n = b.grid.n;
  s.nx = b.grid.nx();
  s.ny = b.grid.ny();
  s.h = b.grid.h;
  s.periodic = periodic;
  s.data = b.values;
  return lattice_radius(s, eta);
}

double radius_uniform_continuity(const std::function<double(const Point&)>& b, int n, const Point& lo, const Point& hi, double eta, bool periodic,
                                 int initial_cells) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  return refined_radius([&](const Point& x, double* out) { *out = b(x); }, 1, n, lo, hi, eta, periodic, initial_cells).r;
}

namespace {

double torus_bump(const ConditionADecomposition& d, const Point& c, const Point& x) {
  const double dx = periodic_delta(x[0] - c[0], d.period[0]);
  const double dy = periodic_delta(x[1] - c[1], d.period[1]);
  const double q = (dx * dx + dy * dy) / (d.radius * d.radius);
  return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
}

std::vector<double> all_weights(const ConditionADecomposition& d, const Point& x) {
  std::vector<double> w(d.centers.size(), 1.0);
  if (w.size() == 1) return w;
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += (w[i] = torus_bump(d, d.centers[i], x));
  for (double& v : w) v = total > 0.0 ? v / total : 0.0;
  return w;
}

double approx_with(const ConditionADecomposition& d, const std::vector<double>& w, const Point& nu) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) acc += w[i] * d.psi->eval(d.centers[i], nu);
  return acc;
}

}  // namespace

double ConditionADecomposition::weight(std::size_t i, const Point& x) const { return all_weights(*this, x).at(i); }

double ConditionADecomposition::approx(const Point& x, const Point& nu) const { return approx_with(*this, all_weights(*this, x), nu); }

double ConditionADecomposition::scan(int points_per_axis, int dirs) const {
  double worst = 0.0;
  const int px = period[0] > 0.0 ? points_per_axis : 1;
  const int py = period[1] > 0.0 ? points_per_axis : 1;
  for (int j = 0; j < py; ++j)
    for (int i = 0; i < px; ++i) {
      const Point x{period[0] * (i + 0.37) / px, period[1] * (j + 0.37) / py};
      const auto w = all_weights(*this, x);
      for (int d = 0; d < dirs; ++d) {
        const double t = std::numbers::pi * (d + 0.5) / dirs;
        const Point nu{std::cos(t), std::sin(t)};
        worst = std::max(worst, std::abs(psi->eval(x, nu) - approx_with(*this, w, nu)));
      }
    }
  return worst;
}

ConditionADecomposition decompose_condition_A(const DensityPtr& psi, double delta, int scan_points, int directions) {
  if (!psi) throw std::invalid_argument("null density");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  ConditionADecomposition d;
  d.delta = delta;
  d.psi = psi;
  d.directions = directions;
  std::vector<Point> dirs;
  for (int k = 0; k < directions; ++k) {
    const double t = std::numbers::pi * k / directions;
    dirs.push_back({std::cos(t), std::sin(t)});
  }
  auto sample_phi = [&](const Point& x) {
    std::vector<double> v(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) v[k] = psi->eval(x, dirs[k]);
    return v;
  };
  if (psi->x_independent()) {
    d.centers = {{0.0, 0.0}};
    d.phi = {sample_phi({0.0, 0.0})};
    d.scan_error = 0.0;
    return d;
  }
  const auto per = psi->period();
  if (!per) throw std::invalid_argument("condition (A) decomposition needs a periodic or x-independent density");
  d.period = *per;
  const bool ax = d.period[0] > 0.0, ay = d.period[1] > 0.0;
  // Modulus of x -> psi(x, .) in the sup-over-directions metric, along the active axes.
  const int n = (ax && ay) ? 2 : 1;
  const int axis = ax ? 0 : 1;
  VectorSampler sampler = [&](const Point& y, double* out) {
    Point x{0.0, 0.0};
    if (n == 2) x = y;
    else x[static_cast<std::size_t>(axis)] = y[0];
    for (std::size_t k = 0; k < dirs.size(); ++k) out[k] = psi->eval(x, dirs[k]);
  };
  const Point hi = n == 2 ? d.period : Point{d.period[static_cast<std::size_t>(axis)], 0.0};
  const auto est = refined_radius(sampler, static_cast<int>(dirs.size()), n, {0.0, 0.0}, hi, delta, true, 64);
  if (!est.resolved) throw std::runtime_error("density is not uniformly continuous in x at this delta: the sampled radius shrinks with the sampling");
  const double r = est.r;
  // Keep a margin for the sampled estimate of the supremum.
  d.radius = 0.875 * r;
  const double min_period = ax && ay ? std::min(d.period[0], d.period[1]) : hi[0];
  if (d.radius < 1e-4 * min_period) throw std::runtime_error("density is not uniformly continuous at this delta (radius collapsed)");
  const int nx = ax ? static_cast<int>(std::ceil(d.period[0] / d.radius)) : 1;
  const int ny = ay ? static_cast<int>(std::ceil(d.period[1] / d.radius)) : 1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Point c{ax ? d.period[0] * i / nx : 0.0, ay ? d.period[1] * j / ny : 0.0};
      d.centers.push_back(c);
      d.phi.push_back(sample_phi(c));
    }
  // Certificate scan with the worst point reported on failure.
  double worst = 0.0;
  Point wx{0.0, 0.0}, wnu{1.0, 0.0};
  const int px = ax ? scan_points : 1, py = ay ? scan_points : 1;
  for (int j = 0; j < py; ++j)
    for (int i = 0; i < px; ++i) {
      const Point x{d.period[0] * (i + 0.5) / px, d.period[1] * (j + 0.5) / py};
      const auto w = all_weights(d, x);
      for (const auto& nu : dirs) {
        const double e = std::abs(psi->eval(x, nu) - approx_with(d, w, nu));
        if (e > worst) {
          worst = e;
          wx = x;
          wnu = nu;
        }
      }
    }
  d.scan_error = worst;
  if (worst > delta) {
    std::ostringstream os;
    os << "condition (A) scan error " << worst << " exceeds delta " << delta << " at x=(" << wx[0] << "," << wx[1] << ") nu=(" << wnu[0] << "," << wnu[1]
       << ")";
    throw std::runtime_error(os.str());
  }
  return d;
}

CompatibilitySchedule build_compatibility_schedule(const std::vector<double>& eps, SchedulePolicy policy, int first_k) {
  if (eps.empty()) throw std::invalid_argument("empty eps sequence");
  if (first_k < 1) throw std::invalid_argument("first_k must be positive");
  CompatibilitySchedule c;
  c.eps = eps;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw std::invalid_argument("eps must be positive");
    if (i > 0 && eps[i] > eps[i - 1]) throw std::invalid_argument("eps must be nonincreasing");
    const double k = static_cast<double>(i) + first_k;
    const double s = policy == SchedulePolicy::Default ? 1.0 - 1.0 / (k * (1.0 + std::abs(std::log(eps[i])))) : 1.0 - 1.0 / k;
    c.s.push_back(s);
    c.diagnostic.push_back((1.0 - s) * std::log(eps[i]));
  }
  for (std::size_t i = 1; i < c.diagnostic.size(); ++i)
    if (std::abs(c.diagnostic[i]) > std::abs(c.diagnostic[c.peak])) c.peak = i;
  for (std::size_t i = c.peak + 1; i < c.diagnostic.size(); ++i)
    if (std::abs(c.diagnostic[i]) > std::abs(c.diagnostic[i - 1]) * (1.0 + 1e-12)) c.flagged.push_back(i);
  const double peak = std::abs(c.diagnostic[c.peak]);
  c.converges = c.flagged.empty() && std::abs(c.diagnostic.back()) <= 0.5 * peak;
  if (peak == 0.0) c.converges = true;
  return c;
}

double Bump1D::value(double x) const {
  const double q = x * x / (rho * rho);
  return q < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
}

double Bump1D::derivative(double x) const {
  const double q = x * x / (rho * rho);
  if (q >= 1.0) return 0.0;
  const double dq = 2.0 * x / (rho * rho);
  return value(x) * (-dq / ((1.0 - q) * (1.0 - q)));
}

double Bump1D::sup_derivative() const {
  double m = 0.0;
  const int samples = 20000;
  for (int i = 1; i < samples; ++i) m = std::max(m, std::abs(derivative(rho * i / samples)));
  return m;
}

namespace {

Grid lemma_grid(double R, int cells) { return Grid::make(1, {cells, 1}, 4.0 * R / cells, {-2.0 * R, 0.0}); }

ScalarField sample(const Grid& g, const std::function<double(double)>& f) {
  ScalarField out(g);
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = f(g.center(k)[0]);
  return out;
}

// (T - Id) phi with T the Fourier multiplier |2 pi xi + omega|^{-alpha}, on a zero-padded
// periodic grid. Returned as complex samples at the grid cells.
std::vector<std::complex<double>> modulated_defect(const ScalarField& phi, double alpha, double omega) {
  const Grid& g = phi.grid;
  const int N = g.nx();
  const int M = 4 * N;
  fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(M));
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fwd = fftw_plan_dft_1d(M, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(M, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (int m = 0; m < M; ++m) {
    buf[m][0] = m < N ? phi[static_cast<std::size_t>(m)] : 0.0;
    buf[m][1] = 0.0;
  }
  fftw_execute(fwd);
  const double L = M * g.h;
  // Inside the bin holding the zero of 2 pi xi + omega use the bin average of |t|^{-alpha}.
  const double half_bin = std::numbers::pi / L;
  for (int m = 0; m < M; ++m) {
    const double xi = (m < M / 2 ? m : m - M) / L;
    const double t = std::abs(2.0 * std::numbers::pi * xi + omega);
    const double sym = (t < half_bin ? std::pow(half_bin, -alpha) / (1.0 - alpha) : std::pow(t, -alpha)) - 1.0;
    buf[m][0] *= sym / M;
    buf[m][1] *= sym / M;
  }
  fftw_execute(inv);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m) out[static_cast<std::size_t>(m)] = {buf[m][0], buf[m][1]};
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  return out;
}

double sup_defect(const ScalarField& f, double alpha) {
  FracOperatorConfig cfg;
  const ScalarField I = riesz_potential_field(f, alpha, cfg);
  double m = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) m = std::max(m, std::abs(I[k] - f[k]));
  return m;
}

}  // namespace

MollificationReport mollification_bound_check(const std::function<double(double)>& b, const Bump1D& phi, double R, double alpha,
                                              const std::vector<double>& eta_list, int cells) {
  if (!(R > 1.0)) throw std::invalid_argument("R must exceed 1");
  if (phi.rho > R) throw std::invalid_argument("phi must be supported in B_R");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1) for n = 1");
  if (eta_list.empty()) throw std::invalid_argument("empty eta list");
  const Grid g = lemma_grid(R, cells);
  const ScalarField bs = sample(g, b);
  ScalarField f(g);
  for (std::size_t k = 0; k < g.size(); ++k) f[k] = bs[k] * phi.value(g.center(k)[0]);
  MollificationReport rep;
  rep.lhs = sup_defect(f, alpha);
  double b_sup = 0.0;
  for (double v : bs.values) b_sup = std::max(b_sup, std::abs(v));
  const double phi_sup = phi.amplitude;
  const double dphi_sup = phi.sup_derivative();
  const int n = 1;
  const double om = omega_n(n);
  const double ga = gamma_alpha(n, alpha);
  rep.rhs = std::numeric_limits<double>::infinity();
  for (double eta : eta_list) {
    const double r = radius_uniform_continuity([&](const Point& x) { return b(x[0]); }, 1, {-3.0 * R, 0.0}, {3.0 * R, 0.0}, eta, false, 256);
    std::array<double, 4> t{};
    t[0] = std::max(std::pow(3.0 * R, alpha) - std::pow(r, alpha), alpha * std::pow(R, alpha) / n) * om / (alpha * ga) * b_sup * phi_sup;
    t[1] = std::abs(1.0 - om * std::pow(r, alpha) / (alpha * ga)) * b_sup * phi_sup;
    t[2] = om * std::pow(r, alpha) * eta / (alpha * ga) * phi_sup;
    t[3] = om * std::pow(r, alpha + 1.0) / ((alpha + 1.0) * ga) * b_sup * dphi_sup;
    const double total = t[0] + t[1] + t[2] + t[3];
    if (total < rep.rhs) {
      rep.rhs = total;
      rep.terms = t;
      rep.eta = eta;
      rep.r_b = r;
    }
  }
  rep.holds = rep.lhs <= rep.rhs;
  return rep;
}

std::vector<ScheduleRow> mollification_schedule(const std::vector<double>& eps, const std::vector<double>& alpha, const Bump1D& phi, int cells,
                                                int first_k) {
  if (eps.size() != alpha.size()) throw std::invalid_argument("schedule lengths differ");
  const double R = phi.rho;
  const Grid g = lemma_grid(R, cells);
  const ScalarField ph = sample(g, [&](double x) { return phi.value(x); });
  std::vector<ScheduleRow> rows;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ScheduleRow row;
    row.k = static_cast<int>(i) + first_k;
    row.eps = eps[i];
    row.alpha = alpha[i];
    row.diagnostic = alpha[i] * std::log(eps[i]);
    const double omega = 2.0 * std::numbers::pi / eps[i];
    if (eps[i] >= 8.0 * g.h) {
      ScalarField f(g);
      for (std::size_t k = 0; k < g.size(); ++k) f[k] = 0.5 * (1.0 + std::cos(omega * g.center(k)[0])) * ph[k];
      row.lhs = sup_defect(f, alpha[i]);
    } else {
      // Mean part on the grid; the oscillating part through its envelope
      // sup over the fast phase of Re(e^{i omega x} (T_omega - Id) phi).
      row.spectral = true;
      ScalarField half(g);
      for (std::size_t k = 0; k < g.size(); ++k) half[k] = 0.5 * ph[k];
      FracOperatorConfig cfg;
      const ScalarField I = riesz_potential_field(half, alpha[i], cfg);
      const auto osc = modulated_defect(ph, alpha[i], omega);
      for (std::size_t k = 0; k < g.size(); ++k) row.lhs = std::max(row.lhs, std::abs(I[k] - half[k]) + 0.5 * std::abs(osc[k]));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fracvar
