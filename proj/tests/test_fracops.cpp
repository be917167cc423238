#include "fracvar/fracops.hpp"
#include "fracvar/lab.hpp"
#include "fracvar/specfun.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace fracvar;

namespace {

FracOperatorConfig config(double s, MeasureModel m = MeasureModel::Faces) {
  FracOperatorConfig c;
  c.s = s;
  c.measure = m;
  return c;
}

LabelField disk(const Grid& g, double r) {
  LabelField u(g, LabelSet({0.0, 1.0}));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    u.index[k] = c[0] * c[0] + c[1] * c[1] < r * r ? 1 : 0;
  }
  return u;
}

}  // namespace

// I^alpha exp(-|x|^2) at the origin = pi Gamma(alpha/2) / gamma_alpha in the plane.
TEST(RieszPotential, GaussianAtOrigin) {
  const Grid g = Grid::box(2, 255, -6.0, 6.0);
  ScalarField f(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    f[k] = std::exp(-(c[0] * c[0] + c[1] * c[1]));
  }
  const double expected[] = {0.903617581243730850, 0.852441376743670575};
  int i = 0;
  for (double alpha : {0.3, 0.7}) {
    const ScalarField p = riesz_potential_field(f, alpha, config(0.5));
    EXPECT_NEAR(p.at(127, 127) / expected[i++], 1.0, 1e-3) << alpha;
  }
}

TEST(RieszPotential, DirectAndFftEnginesAgree) {
  const Grid g = Grid::box(2, 32, -1.0, 1.0);
  const ScalarField psi = lab::random_bump_field(g, 5);
  FracOperatorConfig fft = config(0.4);
  FracOperatorConfig direct = fft;
  direct.engine = LatticeEngine::Direct;
  const ScalarField a = riesz_potential_field(psi, 0.4, fft), b = riesz_potential_field(psi, 0.4, direct);
  const VectorField ga = frac_gradient_direct(psi, fft), gb = frac_gradient_direct(psi, direct);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(a[k], b[k], 1e-12);
    EXPECT_NEAR(ga.comp[0][k], gb.comp[0][k], 1e-12);
    EXPECT_NEAR(ga.comp[1][k], gb.comp[1][k], 1e-12);
  }
}

TEST(FracGradient, DualityIsExact) {
  const Grid g = Grid::box(2, 64, -1.0, 1.0);
  for (double s : {0.3, 0.6, 0.9}) {
    const DualityReport r = duality_residual(lab::random_bump_field(g, 11), lab::random_bump_vector(g, 11), config(s));
    EXPECT_LT(r.relative, 1e-12) << s;
    EXPECT_GT(std::abs(r.gradient_pairing), 1e-3);
  }
}

TEST(FracGradient, IdentitiesConvergeUnderRefinement) {
  double previous = 1.0;
  for (int cells : {64, 128}) {
    const Grid g = Grid::box(2, cells, -1.0, 1.0);
    const auto psi = lab::random_bump_field(g, 3), phi = lab::random_bump_field(g, 3 + 7919);
    const double leib = leibniz_residual(psi, phi, config(0.6)).relative;
    const double div = leibniz_divergence_residual(lab::random_bump_vector(g, 3), phi, config(0.6)).relative;
    const double cross = cross_path_residual(psi, config(0.6)).relative;
    EXPECT_LT(leib, 0.5 * previous);
    EXPECT_LT(div, 2e-2);
    EXPECT_LT(cross, 4e-2);
    previous = leib;
  }
  EXPECT_LT(previous, 2e-3);
}

// A 1% error in the gradient normalization must be visible to the checks.
TEST(FracGradient, InjectedFaultIsDetected) {
  const Grid g = Grid::box(2, 128, -1.0, 1.0);
  const auto psi = lab::random_bump_field(g, 3), phi = lab::random_bump_field(g, 3 + 7919);
  const auto Psi = lab::random_bump_vector(g, 3);
  FracOperatorConfig faulty = config(0.6);
  faulty.mu_fault = 1.01;
  EXPECT_LT(duality_residual(psi, Psi, config(0.6)).relative, 1e-12);
  EXPECT_GT(duality_residual(psi, Psi, faulty).relative, 5e-3);
  const double clean = leibniz_divergence_residual(Psi, phi, config(0.6)).relative;
  EXPECT_GT(leibniz_divergence_residual(Psi, phi, faulty).relative, 2.0 * clean);
}

TEST(FracGradient, EstimatesHold) {
  const Grid g = Grid::box(2, 64, -1.0, 1.0);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto psi = lab::random_bump_field(g, seed);
    for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
      const EstimateReport r = lp_estimate_check(psi, p, config(0.5));
      EXPECT_TRUE(r.holds);
      EXPECT_LT(r.ratio(), 1.0);
    }
    const NlEstimateReport nl = nl_estimate_check(psi, lab::random_bump_field(g, seed + 50), config(0.5));
    EXPECT_TRUE(nl.holds_printed);
    EXPECT_TRUE(nl.holds_scaled);
  }
}

// |D^s 1_(-1,1)|(R) = |I^{1-s}(delta_{-1} - delta_1)|(R) = 4 / (alpha gamma_alpha), alpha = 1 - s.
TEST(FracVariation, IntervalClosedForm) {
  const Grid g = Grid::box(1, 512, -2.0, 2.0);
  LabelField u(g, LabelSet({0.0, 1.0}));
  for (std::size_t k = 0; k < g.size(); ++k) u.index[k] = std::abs(g.center(k)[0]) < 1.0 ? 1 : 0;
  EXPECT_NEAR(frac_variation(u, std::nullopt, config(0.5)).total_with_tail(), 3.19153824321146142, 1e-4);
  EXPECT_NEAR(frac_variation(u, std::nullopt, config(0.9)).total_with_tail(), 2.12847912222677185, 1e-4);
}

// Continuum |D^s 1_{B_1}|(R^2) from an independent radial quadrature.
TEST(FracVariation, UnitDiskMatchesContinuum) {
  const LabelField u = disk(Grid::box(2, 128, -1.5, 1.5), 1.0);
  EXPECT_NEAR(frac_variation(u, std::nullopt, config(0.5, MeasureModel::Mollified)).total_with_tail() / 8.7635, 1.0, 2e-3);
  EXPECT_NEAR(frac_variation(u, std::nullopt, config(0.9, MeasureModel::Mollified)).total_with_tail() / 6.4903, 1.0, 2e-3);
}

TEST(FracVariation, MollifiedMeasureRemovesStaircaseExcess) {
  const LabelField u = disk(Grid::box(2, 128, -1.5, 1.5), 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double faces = frac_variation(u, std::nullopt, config(0.99)).total_with_tail();
  const double mollified = frac_variation(u, std::nullopt, config(0.99, MeasureModel::Mollified)).total_with_tail();
  EXPECT_GT(faces / two_pi, 1.03);
  EXPECT_NEAR(mollified / two_pi, 1.0, 1e-2);
}

TEST(FracVariation, WholeSpaceNeedsConstantExterior) {
  const Grid g = Grid::box(2, 32, 0.0, 1.0);
  LabelField u(g, LabelSet({0.0, 1.0}));
  for (std::size_t k = 0; k < g.size(); ++k) u.index[k] = g.center(k)[0] < 0.5 ? 1 : 0;
  EXPECT_THROW(frac_variation(u, std::nullopt, config(0.5)), std::invalid_argument);
  EXPECT_NO_THROW(frac_variation(u, DomainMask::all(g), config(0.5)));
}

TEST(FracVariation, V1sConstantsApproachLimits) {
  const V1sReport r = v1s_constants(2, 2.0, 0.999);
  EXPECT_NEAR(r.limit_variation, 2.0, 1e-15);
  EXPECT_NEAR(r.limit_sup, 4.0 * 2.0 * 2.0 * std::numbers::pi * 2.0, 1e-12);
  EXPECT_NEAR(r.c_variation / r.limit_variation, 1.0, 1e-2);
  EXPECT_NEAR(r.c_sup / r.limit_sup, 1.0, 1e-2);
}

TEST(FracOperatorConfig, Validation) {
  FracOperatorConfig c;
  c.s = 1.0;
  EXPECT_THROW(c.validate(), std::domain_error);
  c.s = 0.5;
  c.mu_fault = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_measure_model("mollified"), MeasureModel::Mollified);
  EXPECT_EQ(to_string(MeasureModel::Faces), "faces");
  EXPECT_THROW(parse_measure_model("smooth"), std::invalid_argument);
}
