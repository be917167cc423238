#include "fracvar/kernels.hpp"

#include "fracvar/specfun.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace fracvar::kernels {

namespace {

GaussRule make_rule(int q) {
  GaussRule r;
  r.x.resize(q);
  r.w.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = q * (x * p1 - p0) / (x * x - 1.0);
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Distance from the origin to the closed square of half-width `half` centered at c.
double square_distance(const Point& c, double half) {
  const double dx = std::max(std::abs(c[0]) - half, 0.0);
  const double dy = std::max(std::abs(c[1]) - half, 0.0);
  return std::hypot(dx, dy);
}

// Tensor Gauss quadrature over the unit square centered at c, refined near the origin.
// f(zx, zy, r2, acc) adds weighted integrand values into acc.
template <int NV, class F>
std::array<double, NV> tensor_square(const Point& c, int near, F&& f) {
  const double d = square_distance(c, 0.5);
  int m = 1, q = 2;
  if (d < 1.0) {
    m = 8;
    q = 8;
  } else if (d < std::max(3.0, static_cast<double>(near))) {
    m = 2;
    q = 6;
  } else if (d < 10.0) {
    q = 4;
  } else if (d < 30.0) {
    q = 3;
  }
  const GaussRule& g = gauss_legendre(q);
  std::array<double, NV> acc{};
  const double sub = 1.0 / m;
  for (int a = 0; a < m; ++a) {
    const double x0 = c[0] - 0.5 + (a + 0.5) * sub;
    for (int b = 0; b < m; ++b) {
      const double y0 = c[1] - 0.5 + (b + 0.5) * sub;
      for (int i = 0; i < q; ++i) {
        const double zx = x0 + 0.5 * sub * g.x[i];
        for (int j = 0; j < q; ++j) {
          const double zy = y0 + 0.5 * sub * g.x[j];
          const double wgt = 0.25 * sub * sub * g.w[i] * g.w[j];
          f(zx, zy, zx * zx + zy * zy, wgt, acc);
        }
      }
    }
  }
  return acc;
}

// Integral of r^p Y(theta) over the square of half-width `half` centered at c, which must
// contain the origin (interior or boundary). Requires p + 2 > 0.
template <int NV, class Y>
std::array<double, NV> polar_square(const Point& c, double half, double p, Y&& y) {
  const Point v[4] = {{c[0] - half, c[1] - half}, {c[0] + half, c[1] - half}, {c[0] + half, c[1] + half}, {c[0] - half, c[1] + half}};
  const GaussRule& g = gauss_legendre(24);
  std::array<double, NV> acc{};
  for (int e = 0; e < 4; ++e) {
    const Point a = v[e];
    const Point b = v[(e + 1) % 4];
    // Foot of the perpendicular from the origin to the edge line.
    const Point t{b[0] - a[0], b[1] - a[1]};
    const double tt = t[0] * t[0] + t[1] * t[1];
    const double lam = -(a[0] * t[0] + a[1] * t[1]) / tt;
    const Point foot{a[0] + lam * t[0], a[1] + lam * t[1]};
    const double dist = std::hypot(foot[0], foot[1]);
    if (dist < 1e-14) continue;
    const double thn = std::atan2(foot[1], foot[0]);
    const double tha = std::atan2(a[1], a[0]);
    const double span = std::atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]);
    for (int half_i = 0; half_i < 2; ++half_i) {
      for (std::size_t k = 0; k < g.x.size(); ++k) {
        const double tloc = 0.5 * half_i + 0.25 * (g.x[k] + 1.0);
        const double th = tha + tloc * span;
        const double rho = dist / std::cos(th - thn);
        const double radial = std::pow(rho, p + 2.0) / (p + 2.0);
        const double wgt = 0.25 * g.w[k] * std::abs(span) * radial;
        y(th, wgt, acc);
      }
    }
  }
  return acc;
}

// Antiderivatives for n = 1.
double pow_abs_integral(double a, double b, double beta) {
  // int_a^b |z|^beta dz, beta > -1.
  auto prim = [beta](double z) { return (z < 0 ? -1.0 : 1.0) * std::pow(std::abs(z), beta + 1.0) / (beta + 1.0); };
  return prim(b) - prim(a);
}

}  // namespace

const GaussRule& gauss_legendre(int q) {
  static std::mutex m;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, make_rule(q)).first;
  return it->second;
}

double potential_cell(int n, double alpha, const Point& c, int near) {
  const double ga = gamma_alpha(n, alpha);
  if (n == 1) return pow_abs_integral(c[0] - 0.5, c[0] + 0.5, alpha - 1.0) / ga;
  const double p = alpha - 2.0;
  if (std::abs(c[0]) <= 0.5 && std::abs(c[1]) <= 0.5) {
    auto r = polar_square<1>(c, 0.5, p, [](double, double w, std::array<double, 1>& acc) { acc[0] += w; });
    return r[0] / ga;
  }
  const double e = 0.5 * p;
  auto r = tensor_square<1>(c, near, [e](double, double, double r2, double w, std::array<double, 1>& acc) { acc[0] += w * std::pow(r2, e); });
  return r[0] / ga;
}

GradientCell gradient_cell(int n, double s, const Point& c, int near) {
  GradientCell out;
  if (n == 1) {
    const double a = c[0] - 0.5, b = c[0] + 0.5;
    const double second = pow_abs_integral(a, b, -s);  // int |z|^{-s} = int z * z |z|^{-2-s}
    double first = 0.0;
    if (c[0] != 0.0) {
      auto q = [s](double z) { return -std::pow(std::abs(z), -s) / s; };
      first = q(b) - q(a);
    }
    out.w0[0] = first;
    out.b[0][0] = second - c[0] * first;
    return out;
  }
  if (c[0] == 0.0 && c[1] == 0.0) {
    // z (x) z |z|^{-3-s} = r^{-1-s} e (x) e.
    auto r = polar_square<3>(c, 0.5, -1.0 - s, [](double th, double w, std::array<double, 3>& acc) {
      const double ex = std::cos(th), ey = std::sin(th);
      acc[0] += w * ex * ex;
      acc[1] += w * ex * ey;
      acc[2] += w * ey * ey;
    });
    out.b[0][0] = r[0];
    out.b[0][1] = out.b[1][0] = r[1];
    out.b[1][1] = r[2];
    return out;
  }
  const double e = -0.5 * (3.0 + s);
  auto r = tensor_square<5>(c, near, [e](double zx, double zy, double r2, double w, std::array<double, 5>& acc) {
    const double k = w * std::pow(r2, e);
    acc[0] += k * zx;
    acc[1] += k * zy;
    acc[2] += k * zx * zx;
    acc[3] += k * zx * zy;
    acc[4] += k * zy * zy;
  });
  out.w0 = {r[0], r[1]};
  // (z - c)_i z_j = z_i z_j - c_i z_j
  out.b[0][0] = r[2] - c[0] * r[0];
  out.b[0][1] = r[3] - c[0] * r[1];
  out.b[1][0] = r[3] - c[1] * r[0];
  out.b[1][1] = r[4] - c[1] * r[1];
  return out;
}

OffsetTable potential_table(int n, std::array<int, 2> shape, double alpha, const Point& shift, int near) {
  if (n == 1) shape[1] = 1;
  OffsetTable t(n, shape);
  const int hx = shape[0] - 1, hy = shape[1] - 1;
  const bool sx = shift[0] != 0.0, sy = n == 2 && shift[1] != 0.0;
  if (!sx && !sy) {
    for (int dy = 0; dy <= hy; ++dy)
      for (int dx = 0; dx <= hx; ++dx) {
        const double v = potential_cell(n, alpha, {static_cast<double>(dx), static_cast<double>(dy)}, near);
        t.at(dx, dy) = t.at(-dx, dy) = t.at(dx, -dy) = t.at(-dx, -dy) = v;
      }
    return t;
  }
  // The kernel is even per axis: cache by doubled absolute center coordinates.
  const int cw = 2 * (hx + 2), ch = 2 * (hy + 2);
  std::vector<double> cache(static_cast<std::size_t>(cw) * ch, std::numeric_limits<double>::quiet_NaN());
  for (int dy = -hy; dy <= hy; ++dy)
    for (int dx = -hx; dx <= hx; ++dx) {
      const Point c{dx + shift[0], n == 2 ? dy + shift[1] : 0.0};
      const int kx = static_cast<int>(std::lround(2.0 * std::abs(c[0])));
      const int ky = static_cast<int>(std::lround(2.0 * std::abs(c[1])));
      double& slot = cache[static_cast<std::size_t>(kx) + static_cast<std::size_t>(cw) * ky];
      if (std::isnan(slot)) slot = potential_cell(n, alpha, {std::abs(c[0]), std::abs(c[1])}, near);
      t.at(dx, dy) = slot;
    }
  return t;
}

GradientTables gradient_tables(int n, std::array<int, 2> shape, double s, int near) {
  if (n == 1) shape[1] = 1;
  GradientTables g;
  for (auto& t : g.w0) t = OffsetTable(n, shape);
  for (auto& row : g.b)
    for (auto& t : row) t = OffsetTable(n, shape);
  const int hx = shape[0] - 1, hy = shape[1] - 1;
  for (int dy = 0; dy <= hy; ++dy)
    for (int dx = 0; dx <= hx; ++dx) {
      const GradientCell c = gradient_cell(n, s, {static_cast<double>(dx), static_cast<double>(dy)}, near);
      for (int sgx : {1, -1})
        for (int sgy : {1, -1}) {
          if ((sgx < 0 && dx == 0) || (sgy < 0 && dy == 0)) continue;
          const int x = sgx * dx, y = sgy * dy;
          g.w0[0].at(x, y) = sgx * c.w0[0];
          g.w0[1].at(x, y) = sgy * c.w0[1];
          g.b[0][0].at(x, y) = c.b[0][0];
          g.b[1][1].at(x, y) = c.b[1][1];
          g.b[0][1].at(x, y) = sgx * sgy * c.b[0][1];
          g.b[1][0].at(x, y) = sgx * sgy * c.b[1][0];
        }
    }
  return g;
}

}  // namespace fracvar::kernels
