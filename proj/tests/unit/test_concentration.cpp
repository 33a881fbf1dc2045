#include <gtest/gtest.h>

#include <cmath>

#include "hrs/concentration.hpp"
#include "hrs/error.hpp"

using namespace hrs;

TEST(Bounds, ClosedForms) {
  // sqrt(pi/2) exp(-eps^2 99 / 2) for eps = 0.3 and 0.1.
  EXPECT_NEAR(bound(BoundKind::sphere, {100.0, 0.3, 0.0, 1.0}), 0.014563911179003243, 1e-16);
  EXPECT_NEAR(bound(BoundKind::sphere, {100.0, 0.1, 0.0, 1.0}), 0.7639838358107005, 1e-15);
  EXPECT_NEAR(bound(BoundKind::gaussian, {0.0, 0.0, 1.0, 1.0}), 0.3032653298563167, 1e-16);
  EXPECT_NEAR(sphere_bound_alt_constant(100.0, 0.3), 0.014563911179003243 / 2.0, 1e-16);
  EXPECT_EQ(bound(BoundKind::hr_scale, {1.0, 0.0, 0.0, 1.0}), 0.5 * std::exp(-32.0));
  EXPECT_THROW(bound(BoundKind::sphere, {100.0, 1.5, 0.0, 1.0}), DomainError);
  EXPECT_THROW(bound(BoundKind::gaussian, {0.0, 0.0, 0.0, 1.0}), DomainError);
  EXPECT_THROW(parse_bound_kind("cauchy"), DomainError);
}

TEST(Bounds, BinomialMargin) {
  EXPECT_NEAR(binomial_margin(0.25, 10000), 3.0 * std::sqrt(0.25 * 0.75 / 10000.0), 1e-17);
  EXPECT_EQ(binomial_margin(0.0, 10), 0.0);
  EXPECT_EQ(binomial_margin(1.5, 10), 0.0);
}

TEST(Profile, CountsStrictExceedances) {
  const std::vector<double> f = {0.0, 1.0, 2.0, 3.0, 4.0};
  const auto rep = concentration_profile(f, {0.5, 1.0, 2.0});
  EXPECT_EQ(rep.levy_mean, 2.0);
  EXPECT_EQ(rep.empirical, (std::vector<double>{0.8, 0.4, 0.0}));
  EXPECT_TRUE(rep.all_pass());
  EXPECT_TRUE(std::isnan(rep.bound[0]));
  const auto strict = concentration_profile(f, {0.5}, [](double) { return 0.1; });
  EXPECT_FALSE(strict.all_pass());
  EXPECT_EQ(strict.to_table().size(), 1u);
}

TEST(Sampler, SpherePointsAreUnit) {
  const Mat S = sample_sphere(9, 500, 4);
  ASSERT_EQ(S.cols(), 10);
  for (Eigen::Index r = 0; r < S.rows(); ++r) EXPECT_NEAR(S.row(r).norm(), 1.0, 1e-14);
  EXPECT_EQ(Vec(S.row(7).transpose()), sphere_point(9, 4, 7));
  // E[x_0^2] = 1/(n+1) on S^n.
  const Mat big = sample_sphere(9, 40000, 5);
  EXPECT_NEAR(big.col(0).squaredNorm() / 40000.0, 0.1, 0.003);
}

TEST(Sampler, GaussianPointsDeterministic) {
  EXPECT_EQ(gaussian_point(50, 1, 3), gaussian_point(50, 1, 3));
  EXPECT_NE(gaussian_point(50, 1, 3), gaussian_point(50, 1, 4));
  EXPECT_EQ(gaussian_point(50, 1, 3).size(), 50);
}

TEST(Sampler, EmpiricalSphereTailWithinBound) {
  const int n = 100;
  auto sampler = [&](std::uint64_t i) { return sphere_point(n - 1, 77, i); };
  const auto rep = empirical_concentration(
      [](const Vec& x) { return x[0]; }, sampler, 20000, {0.2, 0.3},
      [&](double eps) { return bound(BoundKind::sphere, {double(n), eps, 0.0, 1.0}); });
  EXPECT_TRUE(rep.all_pass());
  EXPECT_EQ(rep.samples, 20000u);
  EXPECT_LT(std::abs(rep.levy_mean), 0.01);
}

TEST(Lipschitz, EstimateAndSkips) {
  const auto f = [](const Vec& x) { return 2.0 * x[0] - x[1]; };
  Vec a(2), b(2), c(2);
  a << 0.0, 0.0;
  b << 1.0, 0.0;
  c << 0.0, 1.0;
  const auto e = empirical_lipschitz(f, {{a, b}, {a, c}, {a, a}}, euclidean_distance);
  EXPECT_EQ(e.estimate, 2.0);
  EXPECT_EQ(e.pairs_used, 2u);
  EXPECT_EQ(e.skipped, 1u);
  EXPECT_EQ(l1_distance(b, c), 2.0);
}

TEST(CollapseMetrics, RatiosAndFlag) {
  CycleRecord rec;
  rec.variance_ergodic_end = 0.04;
  rec.variance_contractive_end = 0.0001;
  rec.contraction = true;
  const auto m = collapse_metrics(rec, 0.05, 1.0, 10);
  EXPECT_NEAR(m.contraction_ratio, 0.0025, 1e-15);
  EXPECT_NEAR(m.spread_over_sigma, 0.2, 1e-15);
  EXPECT_TRUE(m.collapsed);
  EXPECT_EQ(m.rho_over_rho_P, 10.0);
  rec.contraction = false;
  EXPECT_FALSE(collapse_metrics(rec, 0.05).collapsed);
  EXPECT_THROW(collapse_metrics(rec, 0.0), DomainError);
}
