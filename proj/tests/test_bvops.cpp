#include "fracvar/bvops.hpp"
#include "fracvar/lab.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace fracvar;

namespace {

LabelField disk(const Grid& g, double r, const LabelSet& t = LabelSet({0.0, 1.0})) {
  LabelField u(g, t);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    u.index[k] = c[0] * c[0] + c[1] * c[1] < r * r ? 1 : 0;
  }
  return u;
}

ScalarField rescaled_bumps(const Grid& g, std::uint64_t seed, const LabelSet& t) {
  const ScalarField raw = lab::random_bump_field(g, seed);
  const auto [lo, hi] = std::minmax_element(raw.values.begin(), raw.values.end());
  ScalarField w(g);
  for (std::size_t k = 0; k < g.size(); ++k) w[k] = t[0] + t.spread() * (raw[k] - *lo) / (*hi - *lo);
  return w;
}

}  // namespace

TEST(Stencil, SizesAndOrders) {
  EXPECT_EQ(stencil(4).dirs.size(), 2u);
  EXPECT_EQ(stencil(8).dirs.size(), 4u);
  EXPECT_EQ(stencil(16).dirs.size(), 8u);
  EXPECT_THROW(stencil(6), std::invalid_argument);
}

// A straight interface with a calibration normal recovers psi exactly.
TEST(Stencil, CroftonCalibrationIsExactOnNormals) {
  const EllipseDensity psi(1.0, 0.6, 0.4);
  for (int order : {4, 8, 16}) {
    const Stencil& st = stencil(order);
    double m[8];
    EXPECT_EQ(crofton_coefficients(st, psi, {0.0, 0.0}, m), 0);
    for (const Point& nu : st.normals) {
      double per_length = 0.0;
      for (std::size_t k = 0; k < st.dirs.size(); ++k) {
        const double len = std::hypot(st.dirs[k][0], st.dirs[k][1]);
        per_length += m[k] * std::abs((st.dirs[k][0] * nu[0] + st.dirs[k][1] * nu[1]) / len);
      }
      EXPECT_NEAR(per_length, psi.eval_unit({0.0, 0.0}, nu), 1e-12) << order;
    }
  }
}

TEST(InterfaceEnergy, AxisAlignedSquareIsExactWithFourNeighbors) {
  const Grid g = Grid::box(2, 32, -1.0, 1.0);
  LabelField u(g, LabelSet({0.0, 2.0}));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    u.index[k] = std::abs(c[0]) < 0.5 && std::abs(c[1]) < 0.5 ? 1 : 0;
  }
  const auto r = anisotropic_energy(u, HomogeneousDensity(1.0), DomainMask::all(g), 4);
  EXPECT_NEAR(r.total, 2.0 * 4.0, 1e-12);
  EXPECT_EQ(r.per_pair.size(), 1u);
}

// Metrication: the 4-neighborhood measures the l1 length of a circle, 16 neighbors nearly the
// Euclidean one.
TEST(InterfaceEnergy, LargerStencilsReduceMetricationError) {
  const Grid g = Grid::box(2, 128, -1.5, 1.5);
  const LabelField u = disk(g, 1.0);
  const HomogeneousDensity psi(1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double e4 = anisotropic_energy(u, psi, DomainMask::all(g), 4).total;
  const double e16 = anisotropic_energy(u, psi, DomainMask::all(g), 16).total;
  EXPECT_NEAR(e4, 8.0, 4.0 * g.h);
  EXPECT_NEAR(e16 / two_pi, 1.0, 0.02);
  EXPECT_LT(std::abs(e16 - two_pi), std::abs(anisotropic_energy(u, psi, DomainMask::all(g), 8).total - two_pi));
}

TEST(InterfaceEnergy, MaskAttributesHalfEdges) {
  const Grid g = Grid::box(2, 16, 0.0, 1.0);
  LabelField u(g, LabelSet({0.0, 1.0}));
  for (std::size_t k = 0; k < g.size(); ++k) u.index[k] = g.center(k)[0] < 0.5 ? 1 : 0;
  DomainMask left(g);
  for (std::size_t k = 0; k < g.size(); ++k) left.inside[k] = g.center(k)[0] < 0.5 ? 1 : 0;
  const HomogeneousDensity psi(1.0);
  const double all = anisotropic_energy(u, psi, DomainMask::all(g), 4).total;
  EXPECT_NEAR(anisotropic_energy(u, psi, left, 4).total, 0.5 * all, 1e-14);
}

TEST(Coarea, LevelIntegralMatchesDirectEnergy) {
  const Grid g = Grid::box(2, 48, -1.0, 1.0);
  const ScalarField w = lab::random_bump_field(g, 4);
  const auto [lo, hi] = std::minmax_element(w.values.begin(), w.values.end());
  const EllipseDensity psi(1.0, 0.5, 0.3);
  const EdgeSet edges = stencil_edges(g, psi, 16);
  const DomainMask all = DomainMask::all(g);
  // The level energy is piecewise constant, so the exact integral equals E(w).
  EXPECT_NEAR(level_energy_integral(w, edges, all, *lo, *hi) / anisotropic_energy_real(w, edges, all), 1.0, 1e-12);
  std::vector<double> ts;
  for (int k = 0; k <= 2000; ++k) ts.push_back(*lo + (*hi - *lo) * k / 2000.0);
  EXPECT_LT(coarea_identity_check(w, psi, all, ts, 16).relative_gap, 1e-2);
}

TEST(Quantizer, GuaranteeAndThresholdsHold) {
  const Grid g = Grid::box(2, 48, -1.0, 1.0);
  const LabelSet t({0.0, 0.5, 2.0, 3.0});
  const EllipseDensity psi(1.0, 0.4, 1.1);
  for (std::uint64_t seed : {2u, 9u})
    for (double eps : {0.1, 0.5, 0.9}) {
      const ScalarField w = rescaled_bumps(g, seed, t);
      const QuantizeResult q = coarea_quantize(w, t, psi, DomainMask::all(g), eps, 16);
      EXPECT_TRUE(q.guarantee_holds);
      EXPECT_LE((1.0 - eps) * q.energy_v, q.energy_w * (1.0 + 1e-12));
      ASSERT_EQ(q.thresholds.size(), t.size() - 1);
      for (std::size_t i = 0; i < q.checks.size(); ++i) {
        const auto& c = q.checks[i];
        EXPECT_TRUE(c.holds);
        EXPECT_GE(c.t, c.lo);
        EXPECT_LE(c.t, c.hi);
      }
      q.v.validate();
      // The quantized field's energy is the sum of the chosen level energies.
      const EdgeSet edges = stencil_edges(g, psi, 16);
      EXPECT_NEAR(anisotropic_energy(q.v, edges, DomainMask::all(g), 16).total, q.energy_v, 1e-9 * q.energy_v);
    }
}

TEST(FracEnergy, ScalesWithLabelJump) {
  const Grid g = Grid::box(2, 64, -1.5, 1.5);
  FracOperatorConfig c;
  c.s = 0.7;
  const HomogeneousDensity psi(1.0);
  const double e1 = frac_energy(disk(g, 1.0), psi, DomainMask::all(g), c);
  const double e3 = frac_energy(disk(g, 1.0, LabelSet({0.0, 3.0})), psi, DomainMask::all(g), c);
  EXPECT_GT(e1, 0.0);
  EXPECT_NEAR(e3 / e1, 3.0, 1e-10);
}

TEST(ExtendLabelField, PadsOutsideMask) {
  const Grid g = Grid::box(2, 8, 0.0, 1.0);
  LabelField u(g, LabelSet({0.0, 1.0, 2.0}), 2);
  DomainMask m(g);
  for (std::size_t k = 0; k < 8; ++k) m.inside[k] = 1;
  const LabelField v = extend_label_field(u, m, 0);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(v.index[k], k < 8 ? 2 : 0);
}
