#include "fracvar/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fracvar {

namespace {

double wrap(double x, double p) {
  const double r = std::fmod(x, p);
  return r < 0.0 ? r + p : r;
}

void require_bounds(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw std::invalid_argument("density bounds must satisfy 0 < lambda <= Lambda");
}

}  // namespace

double Density::eval(const Point& x, const Point& xi) const {
  const double len = norm(xi);
  if (len == 0.0) return 0.0;
  return len * eval_unit(x, {xi[0] / len, xi[1] / len});
}

double Density::weight(const Point&) const { throw std::logic_error("density is not isotropic"); }

HomogeneousDensity::HomogeneousDensity(double a) : a_(a) { require_bounds(a, a); }

std::string HomogeneousDensity::describe() const {
  std::ostringstream os;
  os << "homogeneous(a=" << a_ << ")";
  return os.str();
}

EllipseDensity::EllipseDensity(double a, double b, double angle) : a_(a), b_(b), angle_(angle) { require_bounds(std::min(a, b), std::max(a, b)); }

double EllipseDensity::eval_unit(const Point&, const Point& nu) const {
  const double c = std::cos(angle_), s = std::sin(angle_);
  const double u = c * nu[0] + s * nu[1];
  const double v = -s * nu[0] + c * nu[1];
  return std::sqrt(a_ * a_ * u * u + b_ * b_ * v * v);
}

double EllipseDensity::lambda() const { return std::min(a_, b_); }
double EllipseDensity::Lambda() const { return std::max(a_, b_); }

std::string EllipseDensity::describe() const {
  std::ostringstream os;
  os << "ellipse(a=" << a_ << ",b=" << b_ << ",angle=" << angle_ << ")";
  return os.str();
}

StepLaminate::StepLaminate(double low, double high, double period, double phase, int axis)
    : low_(low), high_(high), period_(period), phase_(phase), axis_(axis) {
  require_bounds(low, high);
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  if (axis != 0 && axis != 1) throw std::invalid_argument("axis must be 0 or 1");
}

double StepLaminate::weight(const Point& x) const {
  return wrap(x[static_cast<std::size_t>(axis_)] - phase_, period_) < 0.5 * period_ ? low_ : high_;
}

std::optional<Point> StepLaminate::period() const {
  Point p{0.0, 0.0};
  p[static_cast<std::size_t>(axis_)] = period_;
  return p;
}

std::string StepLaminate::describe() const {
  std::ostringstream os;
  os << "step_laminate(low=" << low_ << ",high=" << high_ << ",period=" << period_ << ",phase=" << phase_ << ",axis=" << axis_ << ")";
  return os.str();
}

CosineLaminate::CosineLaminate(double mean, double amplitude, double period, int axis)
    : mean_(mean), amplitude_(amplitude), period_(period), axis_(axis) {
  require_bounds(mean - std::abs(amplitude), mean + std::abs(amplitude));
  amplitude_ = std::abs(amplitude);
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
}

double CosineLaminate::weight(const Point& x) const {
  return mean_ + amplitude_ * std::cos(2.0 * std::numbers::pi * x[static_cast<std::size_t>(axis_)] / period_);
}

std::optional<Point> CosineLaminate::period() const {
  Point p{0.0, 0.0};
  p[static_cast<std::size_t>(axis_)] = period_;
  return p;
}

std::string CosineLaminate::describe() const {
  std::ostringstream os;
  os << "cosine_laminate(mean=" << mean_ << ",amplitude=" << amplitude_ << ",period=" << period_ << ",axis=" << axis_ << ")";
  return os.str();
}

Checkerboard::Checkerboard(double low, double high, double period) : low_(low), high_(high), tile_(0.5 * period) {
  require_bounds(low, high);
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
}

double Checkerboard::weight(const Point& x) const {
  const long a = static_cast<long>(std::floor(x[0] / tile_));
  const long b = static_cast<long>(std::floor(x[1] / tile_));
  return ((a + b) % 2 == 0) ? low_ : high_;
}

std::optional<Point> Checkerboard::period() const { return Point{2.0 * tile_, 2.0 * tile_}; }

std::string Checkerboard::describe() const {
  std::ostringstream os;
  os << "checkerboard(low=" << low_ << ",high=" << high_ << ",period=" << 2.0 * tile_ << ")";
  return os.str();
}

TableDensity::TableDensity(std::vector<double> values, int nx, int ny, Point period)
    : values_(std::move(values)), nx_(nx), ny_(ny), period_(period) {
  if (nx < 1 || ny < 1 || values_.size() != static_cast<std::size_t>(nx) * ny) throw std::invalid_argument("table size mismatch");
  if (!(period[0] > 0.0 && period[1] > 0.0)) throw std::invalid_argument("period must be positive");
  lo_ = *std::min_element(values_.begin(), values_.end());
  hi_ = *std::max_element(values_.begin(), values_.end());
  require_bounds(lo_, hi_);
}

double TableDensity::weight(const Point& x) const {
  // Samples sit at cell centers of the period cell; periodic bilinear interpolation.
  const double fx = wrap(x[0], period_[0]) / period_[0] * nx_ - 0.5;
  const double fy = wrap(x[1], period_[1]) / period_[1] * ny_ - 0.5;
  const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0, ty = fy - j0;
  auto at = [&](int i, int j) {
    i = ((i % nx_) + nx_) % nx_;
    j = ((j % ny_) + ny_) % ny_;
    return values_[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * j];
  };
  return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) + (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
}

std::string TableDensity::describe() const {
  std::ostringstream os;
  os << "table(" << nx_ << "x" << ny_ << ",period=" << period_[0] << "x" << period_[1] << ")";
  return os.str();
}

RescaledDensity::RescaledDensity(DensityPtr base, double eps) : base_(std::move(base)), eps_(eps) {
  if (!base_) throw std::invalid_argument("null base density");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
}

double RescaledDensity::eval_unit(const Point& x, const Point& nu) const { return base_->eval_unit({x[0] / eps_, x[1] / eps_}, nu); }

double RescaledDensity::weight(const Point& x) const { return base_->weight({x[0] / eps_, x[1] / eps_}); }

std::optional<Point> RescaledDensity::period() const {
  auto p = base_->period();
  if (!p) return p;
  return Point{(*p)[0] * eps_, (*p)[1] * eps_};
}

std::string RescaledDensity::describe() const {
  std::ostringstream os;
  os << base_->describe() << "@eps=" << eps_;
  return os.str();
}

DensityCheck spot_check(const Density& psi, const Point& lo, const Point& hi, int points, int directions) {
  DensityCheck r;
  const double l = psi.lambda(), L = psi.Lambda();
  for (int a = 0; a < points; ++a)
    for (int b = 0; b < points; ++b) {
      const Point x{lo[0] + (hi[0] - lo[0]) * (a + 0.5) / points, lo[1] + (hi[1] - lo[1]) * (b + 0.5) / points};
      std::vector<Point> dirs;
      for (int d = 0; d < directions; ++d) {
        const double t = 2.0 * std::numbers::pi * d / directions;
        dirs.push_back({std::cos(t), std::sin(t)});
      }
      for (const auto& nu : dirs) {
        const double v = psi.eval(x, nu);
        const double viol = std::max(l - v, v - L);
        r.worst_bound_violation = std::max(r.worst_bound_violation, viol);
      }
      for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = i + 1; j < dirs.size(); ++j) {
          const Point m{0.5 * (dirs[i][0] + dirs[j][0]), 0.5 * (dirs[i][1] + dirs[j][1])};
          const double viol = psi.eval(x, m) - 0.5 * (psi.eval(x, dirs[i]) + psi.eval(x, dirs[j]));
          r.worst_convexity_violation = std::max(r.worst_convexity_violation, viol);
        }
    }
  r.bounds_ok = r.worst_bound_violation <= 1e-12 * std::max(1.0, L);
  r.convex_ok = r.worst_convexity_violation <= 1e-12 * std::max(1.0, L);
  return r;
}

}  // namespace fracvar
