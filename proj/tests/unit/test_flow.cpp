#include <gtest/gtest.h>

#include <cmath>

#include "hrs/error.hpp"
#include "hrs/flow.hpp"
#include "hrs/rng.hpp"

using namespace hrs;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

std::vector<PhasePoint> probes(int count, std::uint64_t seed) {
  std::vector<PhasePoint> out;
  for (int i = 0; i < count; ++i) {
    StreamRng r(seed, static_cast<std::uint64_t>(i));
    Vec u(4), p(4);
    for (int j = 0; j < 4; ++j) u[j] = r.uniform(-1, 1);
    p << 1.0 + r.uniform(), r.uniform(-0.4, 0.4), 1.0 + r.uniform(), r.uniform(-0.4, 0.4);
    out.emplace_back(u, p);
  }
  return out;
}

// beta only in the x-sector (odd under time inversion).
RandersStructure odd_structure() {
  return RandersStructure(LorentzMetric::minkowski(2), 1,
                          DriftField::constant(vec({0.05, 0.2, 0.0, 0.0})));
}

}  // namespace

TEST(KappaSchedule, EndpointsExact) {
  for (auto prof : {KappaProfile::smoothstep, KappaProfile::linear, KappaProfile::cosine}) {
    const KappaSchedule k(2.5, prof);
    EXPECT_EQ(k(0.0), 0.0);
    EXPECT_EQ(k(2.5), 1.0);
    EXPECT_NEAR(k(1.25), 0.5, 1e-15);
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double v = k(2.5 * i / 100.0);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(KappaSchedule, SmoothstepValue) {
  const KappaSchedule k(1.0, KappaProfile::smoothstep);
  EXPECT_DOUBLE_EQ(k(0.25), 0.15625);  // s^2 (3 - 2s) at s = 1/4
}

TEST(KappaSchedule, DomainChecked) {
  const KappaSchedule k(1.0);
  EXPECT_THROW(k(-1e-12), ScheduleDomainError);
  EXPECT_THROW(k(1.0 + 1e-12), ScheduleDomainError);
  EXPECT_THROW(KappaSchedule(0.0), DomainError);
  EXPECT_THROW(parse_kappa_profile("tanh"), DomainError);
  EXPECT_EQ(parse_kappa_profile("cosine"), KappaProfile::cosine);
}

TEST(TimeInversion, IsAnInvolution) {
  for (const auto& pt : probes(20, 1)) {
    const PhasePoint twice = t_inversion(t_inversion(pt, 2), 2);
    EXPECT_EQ(twice.u, pt.u);
    EXPECT_EQ(twice.p, pt.p);
  }
}

TEST(TimeInversion, SignPattern) {
  const PhasePoint pt(vec({1, 2, 3, 4}), vec({5, 6, 7, 8}));
  const PhasePoint r = t_inversion(pt, 2);
  EXPECT_EQ(r.u, vec({1, 2, -3, -4}));
  EXPECT_EQ(r.p, vec({-5, -6, 7, 8}));
}

TEST(UtDeform, Endpoints) {
  const auto s = odd_structure();
  const Mat h = 0.7 * s.eta();
  for (const auto& pt : probes(50, 2)) {
    EXPECT_NEAR(ut_deform(s, h, 0.0, pt), hr_value(s, pt), 1e-14);
    EXPECT_EQ(ut_deform(s, h, 1.0, pt), std::sqrt(std::abs(pt.p.dot(h * pt.p))));
  }
}

TEST(HtClassical, ClosedFormAndVanishing) {
  const auto s = odd_structure();
  const KappaSchedule k(1.0);
  const Mat h = s.eta();
  for (const auto& pt : probes(50, 3)) {
    const double bp = s.beta()(pt.u).dot(pt.p);
    EXPECT_NEAR(ht_classical(s, h, k, 0.3, pt), (1.0 - k(0.3)) * bp, 1e-15);
    EXPECT_EQ(ht_classical(s, h, k, 1.0, pt), 0.0);
  }
  EXPECT_EQ(metastable_residual(s, h, k, probes(100, 4), 1.0), 0.0);
  EXPECT_THROW(metastable_residual(s, h, k, {}, 1.0), DomainError);
}

TEST(HtTwoPoint, AgreesWithClosedFormForOddBeta) {
  const auto s = odd_structure();
  const KappaSchedule k(1.0);
  const Mat h = s.eta();
  for (const auto& pt : probes(50, 5)) {
    EXPECT_NEAR(ht_two_point(s, h, k, 0.0, pt), ht_classical(s, h, k, 0.0, pt), 1e-14);
    EXPECT_NEAR(ht_two_point(s, h, k, 1.0, pt), 0.0, 1e-14);
  }
}

TEST(Commutation, StateIndependentKappaCommutes) {
  const auto s = odd_structure();
  const auto rep = commutation_check(s, s.eta(), KappaSchedule(1.0), 0.4, probes(100, 6));
  EXPECT_TRUE(rep.passed);
  EXPECT_EQ(rep.max_discrepancy, 0.0);
  EXPECT_EQ(rep.probes, 100u);
}

TEST(Commutation, MomentumDependentKappaDetected) {
  const auto s = odd_structure();
  const StateKappa kappa = [](double t, const PhasePoint& pt) {
    return pt.p[0] > 0.0 ? t : 0.5 * t;
  };
  const auto rep = commutation_check(s, 0.5 * s.eta(), kappa, 0.8, probes(50, 7));
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_discrepancy, 1e-3);
}

TEST(ResidualSweep, EndsAtZero) {
  const auto s = odd_structure();
  const auto table = residual_sweep(s, s.eta(), KappaSchedule(1.0), probes(30, 8), 11);
  ASSERT_EQ(table.size(), 11u);
  EXPECT_EQ(std::get<double>(table.rows().back()[0]), 1.0);
  EXPECT_EQ(std::get<double>(table.rows().back()[2]), 0.0);
  EXPECT_GT(std::get<double>(table.rows().front()[2]), 0.0);
  EXPECT_THROW(residual_sweep(s, s.eta(), KappaSchedule(1.0), probes(3, 9), 1), DomainError);
}

TEST(FlowSnapshot, ClosureMatchesDeform) {
  const auto s = odd_structure();
  const Mat h = 0.9 * s.eta();
  const auto ps = probes(10, 10);
  const auto snap = flow_snapshot(s, h, KappaSchedule(1.0), 0.6, ps);
  const double k = KappaSchedule(1.0)(0.6);
  for (const auto& pt : ps) EXPECT_EQ(snap.F_t(pt), ut_deform(s, h, k, pt));
}
