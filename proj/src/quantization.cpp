#include "hrs/quantization.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hrs/dynamics.hpp"
#include "hrs/error.hpp"

namespace hrs {

ToyHilbert build_operators(int K, double spacing, double hbar) {
  if (K < 8 || (K & (K - 1)) != 0) {
    throw CapabilityError("build_operators: K must be a power of two >= 8, got " +
                          std::to_string(K));
  }
  if (!(spacing > 0.0) || !(hbar > 0.0)) {
    throw DomainError("build_operators: spacing and hbar must be positive");
  }
  ToyHilbert th;
  th.K = K;
  th.spacing = spacing;
  th.hbar = hbar;
  th.grid.resize(K);
  const double x_min = -0.5 * K * spacing;
  for (int j = 0; j < K; ++j) th.grid[j] = x_min + j * spacing;
  th.x_op = th.grid.cast<std::complex<double>>().asDiagonal();

  CMat F(K, K);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(K));
  for (int m = 0; m < K; ++m) {
    for (int j = 0; j < K; ++j) {
      const long mj = (static_cast<long>(m) * j) % K;
      F(m, j) = std::polar(inv_sqrt, -2.0 * std::numbers::pi * static_cast<double>(mj) / K);
    }
  }
  Eigen::VectorXd k(K);
  const double dk = 2.0 * std::numbers::pi / (K * spacing);
  for (int m = 0; m < K; ++m) {
    if (m < K / 2) k[m] = dk * m;
    else if (m == K / 2) k[m] = 0.0;
    else k[m] = dk * (m - K);
  }
  const CMat P = F.adjoint() * (hbar * k).cast<std::complex<double>>().asDiagonal() * F;
  th.p_op = 0.5 * (P + P.adjoint());
  return th;
}

double hermiticity_residual(const CMat& A) { return (A - A.adjoint()).cwiseAbs().maxCoeff(); }

CMat quantum_hamiltonian(const Eigen::VectorXd& beta_values, const ToyHilbert& th, double kappa_t) {
  if (beta_values.size() != th.K) throw ShapeError("quantum_hamiltonian: beta has wrong length");
  if (!(kappa_t >= 0.0 && kappa_t <= 1.0)) {
    throw ScheduleDomainError("quantum_hamiltonian: kappa must lie in [0, 1]");
  }
  if (kappa_t == 1.0) return CMat::Zero(th.K, th.K);
  const CMat B = beta_values.cast<std::complex<double>>().asDiagonal();
  const CMat H = (1.0 - kappa_t) * 0.5 * (B * th.p_op + th.p_op * B);
  return 0.5 * (H + H.adjoint());
}

CMat quantum_hamiltonian(const CVec& beta_values, const ToyHilbert& th, double kappa_t) {
  if (beta_values.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw DomainError("quantum_hamiltonian: beta must be real");
  }
  return quantum_hamiltonian(Eigen::VectorXd(beta_values.real()), th, kappa_t);
}

CMat propagator(const CMat& H, double dtau, double hbar) {
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (H.rows() != H.cols() || hermiticity_residual(H) > 1e-10 * scale) {
    throw DomainError("propagator: Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(H);
  const Eigen::VectorXd& lam = es.eigenvalues();
  CVec phase(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) phase[i] = std::polar(1.0, -lam[i] * dtau / hbar);
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

CMat heisenberg_step(const CMat& A, const CMat& H, double dtau, double hbar) {
  if (A.rows() != H.rows() || A.cols() != H.cols()) {
    throw ShapeError("heisenberg_step: operator shapes differ");
  }
  const CMat U = propagator(H, dtau, hbar);
  return U.adjoint() * A * U;
}

CVec gaussian_packet(const ToyHilbert& th, const WavePacket& packet) {
  if (!(packet.width > 0.0)) throw DomainError("gaussian_packet: width must be positive");
  CVec psi(th.K);
  for (int j = 0; j < th.K; ++j) {
    const double z = (th.grid[j] - packet.x0) / packet.width;
    psi[j] = std::polar(std::exp(-0.25 * z * z), packet.k0 * th.grid[j]);
  }
  return psi / psi.norm();
}

double expectation(const CVec& psi, const CMat& A) { return psi.dot(A * psi).real(); }

io::Table CorrespondenceReport::to_table() const {
  io::Table t({"tau", "expect_x", "classical_x", "abs_error"});
  for (std::size_t i = 0; i < tau.size(); ++i) {
    t.add_row({tau[i], expect_x[i], classical_x[i], std::abs(expect_x[i] - classical_x[i])});
  }
  return t;
}

nlohmann::ordered_json CorrespondenceReport::to_json() const {
  return {{"quantum_drift", io::number(quantum_drift)},
          {"classical_drift", io::number(classical_drift)},
          {"relative_error", io::number(relative_error)},
          {"max_unitarity_error", io::number(max_unitarity_error)},
          {"max_norm_error", io::number(max_norm_error)},
          {"steps_completed", tau.empty() ? 0 : tau.size() - 1},
          {"truncated", truncated},
          {"warning", warning}};
}

namespace {

double edge_mass(const CVec& psi) {
  const auto K = psi.size();
  const auto band = std::max<Eigen::Index>(1, K / 20);
  return psi.head(band).squaredNorm() + psi.tail(band).squaredNorm();
}

}  // namespace

CorrespondenceReport correspondence_check(double b, const ToyHilbert& th, const WavePacket& packet,
                                          double dtau, int steps, double drift_factor) {
  if (!(dtau > 0.0) || steps < 1) {
    throw DomainError("correspondence_check: need dtau > 0 and steps >= 1");
  }
  CorrespondenceReport rep;
  const CVec psi0 = gaussian_packet(th, packet);
  constexpr double kEdgeTolerance = 1e-10;
  if (edge_mass(psi0) > kEdgeTolerance) {
    throw DomainError("correspondence_check: initial packet is not localized inside the grid");
  }

  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(th.K, b);
  const CMat H = drift_factor * quantum_hamiltonian(beta, th, 0.0);
  const CMat U = propagator(H, dtau, th.hbar);
  const CMat I = CMat::Identity(th.K, th.K);
  rep.max_unitarity_error = (U.adjoint() * U - I).cwiseAbs().maxCoeff();

  // Classical oracle: one molecule in d = 2 with beta along x^1.
  const RandersStructure s(LorentzMetric::minkowski(2), 1,
                           DriftField::constant((Vec(4) << 0.0, b, 0.0, 0.0).finished()));
  PhasePoint start(Vec::Zero(4), (Vec(4) << 1.0, 0.0, 0.0, 0.0).finished());
  start.u[1] = expectation(psi0, th.x_op);
  IntegratorOptions opts;
  opts.dt = dtau;
  opts.drift_factor = drift_factor;
  const Trajectory classical = integrate(s, start, 0.0, dtau * steps, opts);

  CMat A = th.x_op;
  CVec psi = psi0;
  rep.tau.push_back(0.0);
  rep.expect_x.push_back(expectation(psi0, A));
  rep.classical_x.push_back(classical.states.front().u[1]);
  for (int n = 1; n <= steps; ++n) {
    psi = U * psi;
    rep.max_norm_error = std::max(rep.max_norm_error, std::abs(psi.norm() - 1.0));
    if (edge_mass(psi) > kEdgeTolerance) {
      rep.truncated = true;
      rep.warning = "packet reached the grid edge at step " + std::to_string(n) +
                    "; run truncated";
      break;
    }
    A = U.adjoint() * A * U;
    rep.tau.push_back(classical.times[static_cast<std::size_t>(n)]);
    rep.expect_x.push_back(expectation(psi0, A));
    rep.classical_x.push_back(classical.states[static_cast<std::size_t>(n)].u[1]);
  }
  const double span = rep.tau.back();
  if (span > 0.0) {
    rep.quantum_drift = (rep.expect_x.back() - rep.expect_x.front()) / span;
    rep.classical_drift = (rep.classical_x.back() - rep.classical_x.front()) / span;
  }
  const double diff = std::abs(rep.quantum_drift - rep.classical_drift);
  rep.relative_error = rep.classical_drift != 0.0 ? diff / std::abs(rep.classical_drift) : diff;
  return rep;
}

}  // namespace hrs
