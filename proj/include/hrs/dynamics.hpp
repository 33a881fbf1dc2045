#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hrs/error.hpp"
#include "hrs/flow.hpp"
#include "hrs/geometry.hpp"
#include "hrs/io.hpp"

namespace hrs {

struct KinematicLimits {
  double c_max = 1.0;
  double L_min = 1.0;
  double A_max = 1.0;

  // A_max = c_max^2 / L_min.
  static KinematicLimits from_min_length(double c_max, double L_min);
  static KinematicLimits from_max_acceleration(double c_max, double A_max);
};

struct Trajectory {
  std::vector<double> times;
  std::vector<PhasePoint> states;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double tau, PhasePoint last_valid)
      : Error(what), tau_(tau), last_(std::move(last_valid)) {}
  double tau() const { return tau_; }
  const PhasePoint& last_valid() const { return last_; }

 private:
  double tau_;
  PhasePoint last_;
};

// Derivative in the Berwald case: du = f beta(u), dp = -f J(u)^T p, where f
// is the drift factor and J the Jacobian of beta.
PhasePoint hamilton_rhs(const RandersStructure& s, const PhasePoint& pt, double drift_factor = 2.0);
// Same equations in the unreparameterized time: scaled by 1 - kappa(t).
PhasePoint hamilton_rhs(const RandersStructure& s, const KappaSchedule& sched, double t,
                        const PhasePoint& pt, double drift_factor = 2.0);

struct IntegratorOptions {
  double dt = 1e-3;
  double drift_factor = 2.0;
  // When set, kappa is frozen at sched(t_frozen) and the right-hand side is
  // scaled by 1 - kappa; otherwise tau is the slow time.
  const KappaSchedule* sched = nullptr;
  double t_frozen = 0.0;
  // Keep every n-th state; the endpoint is always kept.
  int record_stride = 1;
};

// Classical RK4 with ceil(span/dt) equal steps.
Trajectory integrate(const RandersStructure& s, const PhasePoint& pt0, double tau0, double tau1,
                     const IntegratorOptions& opts);

// Sum beta^k(u) p_k.
double drift_hamiltonian(const RandersStructure& s, const PhasePoint& pt);

// tau = tau_tilde / (1 - kappa(t)).
double slow_time(const KappaSchedule& sched, double t, double tau_tilde);

struct KinematicViolation {
  int molecule;
  std::size_t index;
  std::string kind;  // "speed" or "acceleration"
  double value;
};

struct KinematicsReport {
  std::vector<double> max_speed;
  std::vector<double> max_acceleration;
  double max_on_shell_residual = 0.0;
  std::vector<KinematicViolation> violations;
  bool clean() const { return violations.empty(); }
  nlohmann::ordered_json to_json() const;
};

// Speeds and accelerations are finite differences of the d position
// components, measured with the observer metric of `frame`.
KinematicsReport kinematics_check(const Trajectory& traj, int d, const KinematicLimits& limits,
                                  const LorentzMetric& g4, const ObserverFrame& frame);
KinematicsReport kinematics_check(const Trajectory& traj, int d, const KinematicLimits& limits,
                                  const LorentzMetric& g4);

double apparent_celerity(double v_tilde, double a, const KinematicLimits& limits);

// (beta_x, beta_y) with beta_x = (beta - T beta)/2, beta_y = (beta + T beta)/2.
std::pair<Vec, Vec> beta_split(const RandersStructure& s, const Vec& u);

struct BerwaldReport {
  double max_gradient_norm = 0.0;  // Frobenius norm of d beta / du
  double tolerance = 1e-12;
  bool passed = false;
};

BerwaldReport berwald_validator(const RandersStructure& s, const std::vector<Vec>& probes,
                                double tolerance = 1e-12);

// Columns tau, molecule_id, x0.., y0.., px0.., py0.. with one row per molecule
// per recorded state.
io::Table trajectory_table(const Trajectory& traj, int d);

}  // namespace hrs
