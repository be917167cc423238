#include "fracvar/approx.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace fracvar;

namespace {

constexpr double kPi = std::numbers::pi;

double raised_cosine(double x, double p) { return 0.5 * (1.0 + std::cos(2.0 * kPi * x / p)); }

}  // namespace

// For b = (1 + cos(2 pi x / p)) / 2 the worst oscillation over |x - y| <= d is sin(pi d / p),
// so r_b(eta) = p asin(eta) / pi.
TEST(UniformContinuity, RaisedCosineClosedForm) {
  const double p = 0.25;
  const auto b = [&](const Point& x) { return raised_cosine(x[0], p); };
  for (double eta : {0.05, 0.2, 0.5}) {
    const double expected = p * std::asin(eta) / kPi;
    const double r = radius_uniform_continuity(b, 1, {0.0, 0.0}, {1.0, 0.0}, eta, true);
    // Sampling resolves the radius to within one spacing (at most r / 8).
    EXPECT_NEAR(r, expected, expected / 7.0) << eta;
  }
  EXPECT_NEAR(p * std::asin(0.05) / kPi, 0.00398053330916508609, 1e-16);
}

TEST(UniformContinuity, LipschitzRamp) {
  const auto b = [](const Point& x) { return 2.0 * x[0]; };
  EXPECT_NEAR(radius_uniform_continuity(b, 1, {0.0, 0.0}, {1.0, 0.0}, 0.1, false), 0.05, 0.05 / 7.0);
  EXPECT_DOUBLE_EQ(radius_uniform_continuity(b, 1, {0.0, 0.0}, {1.0, 0.0}, 5.0, false), 1.0);
  EXPECT_DOUBLE_EQ(radius_uniform_continuity([](const Point&) { return 3.0; }, 2, {0.0, 0.0}, {1.0, 1.0}, 1e-6, true), 1.0);
}

TEST(UniformContinuity, SampledField) {
  const Grid g = Grid::box(1, 1024, 0.0, 1.0);
  ScalarField f(g);
  for (std::size_t k = 0; k < g.size(); ++k) f[k] = raised_cosine(g.center(k)[0], 0.5);
  const double expected = 0.5 * std::asin(0.1) / kPi;
  EXPECT_NEAR(radius_uniform_continuity(f, 0.1, true), expected, 1.5 * g.h);
}

TEST(Decomposition, XIndependentDensityNeedsOnePiece) {
  const auto psi = std::make_shared<EllipseDensity>(1.0, 0.5, 0.3);
  const ConditionADecomposition d = decompose_condition_A(psi, 0.01);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_LT(d.scan(16, 64), 1e-12);
}

TEST(Decomposition, CosineLaminateWithinTolerance) {
  const auto psi = std::make_shared<CosineLaminate>(1.5, 0.5, 1.0, 0);
  const double delta = 0.05;
  const ConditionADecomposition d = decompose_condition_A(psi, delta);
  EXPECT_GT(d.size(), 1u);
  EXPECT_LE(d.scan_error, delta);
  EXPECT_LE(d.scan(64, 128), delta);
  // The weights form a partition of unity.
  for (double x : {0.0, 0.137, 0.5, 0.93}) {
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) sum += d.weight(i, {x, 0.3});
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Decomposition, DiscontinuousDensityIsRejected) {
  const auto psi = std::make_shared<Checkerboard>(1.0, 2.0, 1.0);
  EXPECT_THROW(decompose_condition_A(psi, 0.05), std::runtime_error);
}

TEST(Schedule, DefaultPolicyConverges) {
  std::vector<double> eps;
  for (int k = 1; k <= 30; ++k) eps.push_back(std::ldexp(1.0, -k));
  const CompatibilitySchedule c = build_compatibility_schedule(eps);
  EXPECT_TRUE(c.converges);
  EXPECT_TRUE(c.flagged.empty());
  // k = 1: s = 1 - 1/(1 + log 2), diagnostic = -log 2 / (1 + log 2).
  EXPECT_NEAR(c.s[0], 1.0 - 1.0 / (1.0 + std::log(2.0)), 1e-15);
  EXPECT_NEAR(c.diagnostic[0], -std::log(2.0) / (1.0 + std::log(2.0)), 1e-15);
  EXPECT_LT(std::abs(c.diagnostic.back()), 0.05);
}

TEST(Schedule, NaivePolicyIsNonConvergent) {
  std::vector<double> eps;
  for (int k = 2; k <= 30; ++k) eps.push_back(std::ldexp(1.0, -k));
  const CompatibilitySchedule c = build_compatibility_schedule(eps, SchedulePolicy::Naive, 2);
  EXPECT_FALSE(c.converges);
  for (double d : c.diagnostic) EXPECT_NEAR(d, -std::log(2.0), 1e-12);
}

TEST(Schedule, RejectsBadInput) {
  EXPECT_THROW(build_compatibility_schedule({}), std::invalid_argument);
  EXPECT_THROW(build_compatibility_schedule({0.1, 0.2}), std::invalid_argument);
  EXPECT_THROW(build_compatibility_schedule({0.1}, SchedulePolicy::Default, 0), std::invalid_argument);
}

TEST(Bump, DerivativeMatchesDifferences) {
  const Bump1D b{2.0, 0.5};
  EXPECT_DOUBLE_EQ(b.value(0.0), 2.0);
  EXPECT_DOUBLE_EQ(b.value(0.6), 0.0);
  double sup = 0.0;
  for (double x = -0.49; x < 0.49; x += 0.01) {
    const double fd = (b.value(x + 1e-6) - b.value(x - 1e-6)) / 2e-6;
    EXPECT_NEAR(b.derivative(x), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    sup = std::max(sup, std::abs(b.derivative(x)));
  }
  EXPECT_GE(b.sup_derivative(), sup);
  EXPECT_LT(b.sup_derivative(), 1.01 * sup);
}

TEST(MollificationBound, HoldsForConstantAndOscillatingWeights) {
  const Bump1D phi{1.0, 1.0};
  const std::vector<double> etas{1e-3, 1e-2, 0.1, 0.5, 1.0};
  const MollificationReport flat = mollification_bound_check([](double) { return 1.0; }, phi, 1.5, 0.1, etas, 1024);
  EXPECT_TRUE(flat.holds);
  EXPECT_DOUBLE_EQ(flat.r_b, 1.0);
  const MollificationReport osc = mollification_bound_check([](double x) { return raised_cosine(x, 0.25); }, phi, 1.5, 0.1, etas, 1024);
  EXPECT_TRUE(osc.holds);
  EXPECT_GT(osc.lhs, flat.lhs);
  EXPECT_NEAR(osc.rhs, osc.terms[0] + osc.terms[1] + osc.terms[2] + osc.terms[3], 1e-12 * osc.rhs);
}

TEST(MollificationSchedule, ValidDecaysInvalidStalls) {
  std::vector<double> ev, av, ei, ai;
  for (int k = 2; k <= 20; k += 3) {
    ev.push_back(1.0 / k);
    av.push_back(1.0 / (k * (1.0 + std::log(static_cast<double>(k)))));
    ei.push_back(std::ldexp(1.0, -k));
    ai.push_back(1.0 / k);
  }
  const Bump1D phi{1.0, 1.0};
  const auto valid = mollification_schedule(ev, av, phi, 2048, 2);
  const auto invalid = mollification_schedule(ei, ai, phi, 2048, 2);
  EXPECT_LT(valid.back().lhs, 0.2 * valid.front().lhs);
  for (const auto& r : invalid) EXPECT_GT(r.lhs, 0.2);
  EXPECT_TRUE(invalid.back().spectral);
}
