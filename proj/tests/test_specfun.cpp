#include "fracvar/specfun.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace fracvar;

// Reference values from 30-digit evaluations of the closed forms.
TEST(Specfun, GammaMatchesReferenceValues) {
  EXPECT_NEAR(gamma_fn(0.1), 9.51350769866873183, 1e-12);
  EXPECT_NEAR(gamma_fn(0.5), 1.77245385090551603, 1e-13);
  EXPECT_NEAR(gamma_fn(4.5), 11.6317283965674489, 1e-11);
  for (double x : {0.3, 1.0, 2.7, 7.5, 20.0}) EXPECT_NEAR(gamma_fn(x) / std::tgamma(x), 1.0, 1e-13) << x;
}

TEST(Specfun, SphereArea) {
  EXPECT_DOUBLE_EQ(omega_n(1), 2.0);
  EXPECT_DOUBLE_EQ(omega_n(2), 2.0 * std::numbers::pi);
  EXPECT_THROW(omega_n(3), std::domain_error);
}

TEST(Specfun, MuAndGammaReferenceValues) {
  EXPECT_NEAR(mu_s(1, 0.5), 0.199471140200716339, 1e-14);
  EXPECT_NEAR(mu_s(2, 0.5), 0.114111419793701562, 1e-14);
  EXPECT_NEAR(mu_s(2, 0.9), 0.0298938913077586850, 1e-15);
  EXPECT_NEAR(gamma_alpha(2, 0.3), 21.6259222596600412, 1e-11);
  EXPECT_NEAR(gamma_alpha(1, 0.5), 2.50662827463100050, 1e-13);
}

TEST(Specfun, PotentialGradientConstantsCompose) {
  for (int n : {1, 2})
    for (double s : {0.05, 0.3, 0.5, 0.8, 0.999}) EXPECT_NEAR(gamma_alpha(n, 1.0 - s) * mu_s(n, s), n - (1.0 - s), 1e-12) << n << " " << s;
}

TEST(Specfun, LimitsAsOrderApproachesOne) {
  for (int n : {1, 2}) {
    const FracConstants c = frac_constants(n, 0.9999);
    EXPECT_NEAR(c.mu_over_one_minus_s() / c.mu_limit(), 1.0, 1e-3);
    EXPECT_NEAR(1e-4 * gamma_alpha(n, 1e-4) / omega_n(n), 1.0, 1e-3);
  }
}

TEST(Specfun, RejectsOrdersOutsideRange) {
  EXPECT_THROW(mu_s(2, 1.0), std::domain_error);
  EXPECT_THROW(mu_s(2, 0.0), std::domain_error);
  EXPECT_THROW(gamma_alpha(1, 1.0), std::domain_error);
  EXPECT_THROW(frac_constants(3, 0.5), std::domain_error);
}
