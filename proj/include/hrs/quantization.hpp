#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrs/io.hpp"

namespace hrs {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Periodic one-dimensional grid with x_j = x_min + j * spacing.
struct ToyHilbert {
  int K = 0;
  double spacing = 1.0;
  double hbar = 1.0;
  Eigen::VectorXd grid;
  CMat x_op;
  CMat p_op;  // F^dagger diag(hbar k) F, Nyquist mode set to zero
};

// K must be >= 8 and a power of two (CapabilityError otherwise).
ToyHilbert build_operators(int K, double spacing, double hbar = 1.0);

double hermiticity_residual(const CMat& A);

// (1 - kappa) (B p + p B) / 2 with B = diag(beta). Complex input with a
// nonzero imaginary part is rejected.
CMat quantum_hamiltonian(const Eigen::VectorXd& beta_values, const ToyHilbert& th, double kappa_t);
CMat quantum_hamiltonian(const CVec& beta_values, const ToyHilbert& th, double kappa_t);

// U = exp(-i H dtau / hbar) from the eigendecomposition of H.
CMat propagator(const CMat& H, double dtau, double hbar = 1.0);
// U^dagger A U.
CMat heisenberg_step(const CMat& A, const CMat& H, double dtau, double hbar = 1.0);

struct WavePacket {
  double x0 = 0.0;
  double width = 1.0;
  double k0 = 0.0;
};

CVec gaussian_packet(const ToyHilbert& th, const WavePacket& packet);
double expectation(const CVec& psi, const CMat& A);

struct CorrespondenceReport {
  std::vector<double> tau;
  std::vector<double> expect_x;
  std::vector<double> classical_x;
  double quantum_drift = 0.0;    // (x(end) - x(0)) / tau_end
  double classical_drift = 0.0;
  double relative_error = 0.0;
  double max_unitarity_error = 0.0;
  double max_norm_error = 0.0;
  bool truncated = false;
  std::string warning;

  io::Table to_table() const;
  nlohmann::ordered_json to_json() const;
};

// Evolves x_op in the Heisenberg picture under drift_factor * b * p (the
// symmetrized Hamiltonian for constant beta = b, times the drift factor) and
// compares <x> with the classical integrator. Stops early if the packet
// reaches the grid edges.
CorrespondenceReport correspondence_check(double b, const ToyHilbert& th, const WavePacket& packet,
                                          double dtau, int steps, double drift_factor = 2.0);

}  // namespace hrs
