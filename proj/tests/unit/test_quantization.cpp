#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hrs/error.hpp"
#include "hrs/quantization.hpp"

using namespace hrs;

TEST(ToyHilbert, SizeMustBePowerOfTwo) {
  EXPECT_THROW(build_operators(12, 0.1), CapabilityError);
  EXPECT_THROW(build_operators(4, 0.1), CapabilityError);
  EXPECT_THROW(build_operators(16, 0.0), DomainError);
  EXPECT_NO_THROW(build_operators(16, 0.1));
}

TEST(ToyHilbert, OperatorsAreHermitian) {
  const auto th = build_operators(64, 0.2, 0.5);
  EXPECT_LT(hermiticity_residual(th.x_op), 1e-15);
  EXPECT_LT(hermiticity_residual(th.p_op), 1e-13);
  EXPECT_EQ(th.grid[0], -6.4);
}

TEST(ToyHilbert, MomentumActsOnFourierModes) {
  const int K = 32;
  const double h = 0.25, hbar = 0.7;
  const auto th = build_operators(K, h, hbar);
  for (int m : {1, 3, -5}) {
    const double k = 2.0 * std::numbers::pi * m / (K * h);
    CVec psi(K);
    for (int j = 0; j < K; ++j) psi[j] = std::polar(1.0, k * th.grid[j]);
    const CVec lhs = th.p_op * psi;
    EXPECT_LT((lhs - hbar * k * psi).cwiseAbs().maxCoeff(), 1e-12);
  }
  // The Nyquist mode is annihilated.
  CVec nyq(K);
  for (int j = 0; j < K; ++j) nyq[j] = j % 2 ? -1.0 : 1.0;
  EXPECT_LT((th.p_op * nyq).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QuantumHamiltonian, ScheduleAndInputChecks) {
  const auto th = build_operators(16, 0.3);
  Eigen::VectorXd beta(16);
  for (int j = 0; j < 16; ++j) beta[j] = 0.1 * std::sin(0.4 * j);
  const CMat H = quantum_hamiltonian(beta, th, 0.25);
  EXPECT_LT(hermiticity_residual(H), 1e-15);
  const CMat H0 = quantum_hamiltonian(beta, th, 0.0);
  EXPECT_LT((H - 0.75 * H0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(quantum_hamiltonian(beta, th, 1.0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(quantum_hamiltonian(beta, th, 1.5), ScheduleDomainError);
  EXPECT_THROW(quantum_hamiltonian(Eigen::VectorXd(Eigen::VectorXd::Zero(8)), th, 0.0),
               ShapeError);
  CVec complex_beta = beta.cast<std::complex<double>>();
  complex_beta[3] += std::complex<double>(0.0, 1e-3);
  EXPECT_THROW(quantum_hamiltonian(complex_beta, th, 0.0), DomainError);
}

TEST(Propagator, UnitaryAndCommutesWithHamiltonian) {
  const auto th = build_operators(32, 0.2);
  Eigen::VectorXd beta(32);
  for (int j = 0; j < 32; ++j) beta[j] = 0.2 * std::cos(0.3 * j);
  const CMat H = quantum_hamiltonian(beta, th, 0.1);
  const CMat U = propagator(H, 0.05);
  const CMat I = CMat::Identity(32, 32);
  EXPECT_LT((U.adjoint() * U - I).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((U * H - H * U).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((heisenberg_step(I, H, 0.05) - I).cwiseAbs().maxCoeff(), 1e-12);
  CMat bad = H;
  bad(0, 1) += 1.0;
  EXPECT_THROW(propagator(bad, 0.1), DomainError);
}

TEST(Propagator, ZeroStepIsIdentity) {
  const auto th = build_operators(8, 1.0);
  const CMat H = quantum_hamiltonian(Eigen::VectorXd(Eigen::VectorXd::Constant(8, 0.3)), th, 0.0);
  EXPECT_LT((propagator(H, 0.0) - CMat::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Packet, NormalizedAndCentred) {
  const auto th = build_operators(128, 0.1);
  const CVec psi = gaussian_packet(th, {0.5, 0.8, 2.0});
  EXPECT_NEAR(psi.norm(), 1.0, 1e-14);
  EXPECT_NEAR(expectation(psi, th.x_op), 0.5, 1e-10);
  EXPECT_NEAR(expectation(psi, th.p_op), 2.0, 1e-6);
}

TEST(Correspondence, HeisenbergDriftMatchesHamilton) {
  const auto th = build_operators(256, 0.1);
  const auto rep = correspondence_check(0.1, th, {0.0, 1.0, 0.0}, 0.01, 100);
  EXPECT_FALSE(rep.truncated);
  EXPECT_EQ(rep.tau.size(), 101u);
  EXPECT_NEAR(rep.classical_drift, 0.2, 1e-14);
  EXPECT_LT(rep.relative_error, 1e-6);
  EXPECT_LT(rep.max_unitarity_error, 1e-12);
}

TEST(Correspondence, EdgeTruncation) {
  const auto th = build_operators(64, 0.1);
  EXPECT_THROW(correspondence_check(0.1, th, {3.1, 0.3, 0.0}, 0.01, 10), DomainError);
  const auto rep = correspondence_check(5.0, th, {0.0, 0.3, 0.0}, 0.05, 200);
  EXPECT_TRUE(rep.truncated);
  EXPECT_FALSE(rep.warning.empty());
}
