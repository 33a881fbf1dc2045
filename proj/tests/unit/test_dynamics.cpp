#include <gtest/gtest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "hrs/dynamics.hpp"
#include "hrs/error.hpp"
#include "hrs/flow.hpp"

using namespace hrs;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

RandersStructure sinusoidal_structure() {
  Mat W = Mat::Zero(4, 4);
  W(1, 1) = 1.0;
  W(1, 0) = 0.5;
  W(3, 3) = 2.0;
  const DriftField beta = DriftField::sinusoidal(vec({0.0, 0.2, 0.0, 0.05}),
                                                 vec({0.0, 0.1, 0.0, 0.05}), W,
                                                 vec({0.0, 0.3, 0.0, 0.0}));
  return RandersStructure(LorentzMetric::minkowski(2), 1, beta);
}

PhasePoint start() { return PhasePoint(vec({0.0, 0.1, 1.0, 0.0}), vec({1.0, 0.3, 1.2, -0.2})); }

}  // namespace

TEST(Hamilton, ConstantDriftIsUniformMotion) {
  const RandersStructure s(LorentzMetric::minkowski(2), 1,
                           DriftField::constant(vec({0.0, 0.3, 0.0, 0.1})));
  IntegratorOptions o;
  o.dt = 0.01;
  const auto traj = integrate(s, start(), 0.0, 2.0, o);
  const PhasePoint& end = traj.states.back();
  EXPECT_NEAR(end.u[1], 0.1 + 2.0 * 0.3 * 2.0, 1e-14);
  EXPECT_NEAR(end.u[3], 2.0 * 0.1 * 2.0, 1e-14);
  EXPECT_EQ(end.p, start().p);
  EXPECT_EQ(traj.times.back(), 2.0);
}

TEST(Hamilton, DriftHamiltonianConserved) {
  const auto s = sinusoidal_structure();
  IntegratorOptions o;
  o.dt = 1e-3;
  o.record_stride = 1000;
  const auto traj = integrate(s, start(), 0.0, 10.0, o);
  const double h0 = drift_hamiltonian(s, traj.states.front());
  for (const auto& st : traj.states) {
    EXPECT_LT(std::abs(drift_hamiltonian(s, st) - h0) / std::abs(h0), 1e-6);
  }
}

TEST(Hamilton, FourthOrderConvergence) {
  // Linear drift: u' = f A u, p' = -f A^T p, solved exactly by exponentials.
  Mat A(4, 4);
  A << 0.0, 0.1, 0.0, 0.0, -0.3, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.4, 0.1, 0.0, -0.4, 0.0;
  const RandersStructure s(LorentzMetric::minkowski(2), 1, DriftField::linear(A, Vec::Zero(4)));
  const double f = 2.0, tau = 3.0;
  const Mat Eu = (f * tau * A).exp();
  const Mat Ep = (-f * tau * A.transpose()).exp();
  const PhasePoint p0 = start();
  const Vec u_exact = Eu * p0.u;
  const Vec p_exact = Ep * p0.p;
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    IntegratorOptions o;
    o.dt = dt;
    o.drift_factor = f;
    const auto end = integrate(s, p0, 0.0, tau, o).states.back();
    err.push_back(std::max((end.u - u_exact).cwiseAbs().maxCoeff(),
                           (end.p - p_exact).cwiseAbs().maxCoeff()));
  }
  EXPECT_NEAR(err[0] / err[1], 16.0, 1.0);
  EXPECT_NEAR(err[1] / err[2], 16.0, 1.0);
}

TEST(Hamilton, FrozenScheduleScalesVelocity) {
  const auto s = sinusoidal_structure();
  const KappaSchedule k(1.0);
  const PhasePoint full = hamilton_rhs(s, start());
  const PhasePoint scaled = hamilton_rhs(s, k, 0.5, start());
  EXPECT_LT((scaled.u - 0.5 * full.u).cwiseAbs().maxCoeff(), 1e-15);
  const PhasePoint frozen = hamilton_rhs(s, k, 1.0, start());
  EXPECT_EQ(frozen.u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamilton, CustomDriftUnsupported) {
  const RandersStructure s(LorentzMetric::minkowski(2), 1,
                           DriftField::custom(4, [](const Vec& u) { return Vec(0.1 * u); }));
  EXPECT_THROW(hamilton_rhs(s, start()), CapabilityError);
}

TEST(Hamilton, DivergenceReported) {
  const RandersStructure s(LorentzMetric::minkowski(2), 1,
                           DriftField::linear(400.0 * Mat::Identity(4, 4), Vec::Zero(4)));
  IntegratorOptions o;
  o.dt = 0.01;
  try {
    integrate(s, start(), 0.0, 10.0, o);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.tau(), 0.0);
    EXPECT_TRUE(e.last_valid().u.allFinite());
  }
}

TEST(SlowTime, Reparameterization) {
  const KappaSchedule k(1.0, KappaProfile::linear);
  EXPECT_DOUBLE_EQ(slow_time(k, 0.5, 1.0), 2.0);
  EXPECT_THROW(slow_time(k, 1.0, 1.0), SingularityError);
}

TEST(ApparentCelerity, ClosedFormValues) {
  const auto lim = KinematicLimits::from_max_acceleration(1.0, 10.0);
  EXPECT_NEAR(apparent_celerity(0.6, 0.0, lim), 0.75, 1e-15);
  EXPECT_NEAR(apparent_celerity(0.6, 8.0, lim), 1.25, 1e-14);
  EXPECT_THROW(apparent_celerity(0.6, 10.0, lim), KinematicDomainError);
  EXPECT_THROW(apparent_celerity(1.0, 0.0, lim), KinematicDomainError);
  EXPECT_THROW(apparent_celerity(-0.1, 0.0, lim), KinematicDomainError);
}

TEST(KinematicLimits, MinimalLength) {
  const auto lim = KinematicLimits::from_min_length(2.0, 0.5);
  EXPECT_DOUBLE_EQ(lim.A_max, 8.0);
  EXPECT_THROW(KinematicLimits::from_min_length(1.0, 0.0), DomainError);
}

TEST(Kinematics, FlagsSuperluminalMoleculeOnce) {
  Trajectory traj;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.1 * i;
    PhasePoint pt(Vec::Zero(8), Vec::Zero(8));
    pt.u[1] = 0.5 * t;  // molecule 0: speed 0.5
    pt.u[5] = 2.0 * t;  // molecule 1: speed 2
    traj.times.push_back(t);
    traj.states.push_back(pt);
  }
  const auto lim = KinematicLimits::from_min_length(1.0, 1e-3);
  const auto rep = kinematics_check(traj, 2, lim, LorentzMetric::minkowski(2));
  EXPECT_NEAR(rep.max_speed[0], 0.5, 1e-12);
  EXPECT_NEAR(rep.max_speed[1], 2.0, 1e-12);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].molecule, 1);
  EXPECT_EQ(rep.violations[0].kind, "speed");
  EXPECT_FALSE(rep.clean());
}

TEST(Kinematics, NeedsThreeSamples) {
  Trajectory traj;
  traj.times = {0.0, 1.0};
  traj.states = {PhasePoint(Vec::Zero(4), Vec::Zero(4)), PhasePoint(Vec::Zero(4), Vec::Zero(4))};
  EXPECT_THROW(kinematics_check(traj, 2, KinematicLimits::from_min_length(1.0, 1.0),
                                LorentzMetric::minkowski(2)),
               Error);
}

TEST(BetaSplit, SumsToBetaWithOppositeParity) {
  const auto s = sinusoidal_structure();
  const Vec u = vec({0.2, -0.4, 0.9, 0.1});
  const auto [bx, by] = beta_split(s, u);
  EXPECT_LT((bx + by - s.beta()(u)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(t_reflect_momentum(bx, 2), -bx);
  EXPECT_EQ(t_reflect_momentum(by, 2), by);
}

TEST(Berwald, ConstantPassesSinusoidalFails) {
  const std::vector<Vec> probes = {Vec::Zero(4), vec({0.1, 0.2, 0.3, 0.4})};
  const RandersStructure flat(LorentzMetric::minkowski(2), 1,
                              DriftField::constant(vec({0.0, 0.1, 0.0, 0.0})));
  EXPECT_TRUE(berwald_validator(flat, probes).passed);
  const auto rep = berwald_validator(sinusoidal_structure(), probes);
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.max_gradient_norm, 0.01);
}

TEST(TrajectoryTable, Columns) {
  const auto s = sinusoidal_structure();
  IntegratorOptions o;
  o.dt = 0.1;
  const auto traj = integrate(s, start(), 0.0, 1.0, o);
  const auto t = trajectory_table(traj, 2);
  EXPECT_EQ(t.columns().size(), 2u + 8u);
  EXPECT_EQ(t.columns()[2], "x0");
  EXPECT_EQ(t.size(), traj.states.size());
}
