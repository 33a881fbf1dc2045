#include "hrs/dynamics.hpp"

#include <cmath>

namespace hrs {

KinematicLimits KinematicLimits::from_min_length(double c_max, double L_min) {
  if (!(c_max > 0.0) || !(L_min > 0.0)) {
    throw DomainError("KinematicLimits: c_max and L_min must be positive");
  }
  return {c_max, L_min, c_max * c_max / L_min};
}

KinematicLimits KinematicLimits::from_max_acceleration(double c_max, double A_max) {
  if (!(c_max > 0.0) || !(A_max > 0.0)) {
    throw DomainError("KinematicLimits: c_max and A_max must be positive");
  }
  return {c_max, c_max * c_max / A_max, A_max};
}

PhasePoint hamilton_rhs(const RandersStructure& s, const PhasePoint& pt, double drift_factor) {
  const DriftField& beta = s.beta();
  if (!beta.has_jacobian()) {
    throw CapabilityError("hamilton_rhs: drift family '" + beta.family_name() +
                          "' is not differentiable");
  }
  check_phase_point(s, pt);
  PhasePoint out;
  out.u = drift_factor * beta(pt.u);
  if (beta.family() == DriftField::Family::constant) {
    out.p = Vec::Zero(pt.p.size());
  } else {
    out.p = -drift_factor * (beta.jacobian(pt.u).transpose() * pt.p);
  }
  return out;
}

PhasePoint hamilton_rhs(const RandersStructure& s, const KappaSchedule& sched, double t,
                        const PhasePoint& pt, double drift_factor) {
  const double scale = 1.0 - sched(t);
  PhasePoint out = hamilton_rhs(s, pt, drift_factor);
  out.u *= scale;
  out.p *= scale;
  return out;
}

double drift_hamiltonian(const RandersStructure& s, const PhasePoint& pt) {
  return s.beta()(pt.u).dot(pt.p);
}

Trajectory integrate(const RandersStructure& s, const PhasePoint& pt0, double tau0, double tau1,
                     const IntegratorOptions& opts) {
  if (!(opts.dt > 0.0)) throw DomainError("integrate: dt must be positive");
  if (!(tau1 > tau0)) throw DomainError("integrate: span must satisfy tau1 > tau0");
  if (opts.record_stride < 1) throw DomainError("integrate: record_stride must be >= 1");
  check_phase_point(s, pt0);

  const double span = tau1 - tau0;
  const auto steps = static_cast<long>(std::ceil(span / opts.dt * (1.0 - 1e-12)));
  const double h = span / static_cast<double>(steps);
  double scale = 1.0;
  if (opts.sched) scale = 1.0 - (*opts.sched)(opts.t_frozen);
  const double f = opts.drift_factor;

  // Returns false when a stage state is no longer finite.
  auto rhs = [&](const Vec& u, const Vec& p, Vec& du, Vec& dp) {
    if (!u.allFinite() || !p.allFinite()) return false;
    PhasePoint d = hamilton_rhs(s, PhasePoint(u, p), f);
    du = scale * d.u;
    dp = scale * d.p;
    return true;
  };

  Trajectory traj;
  traj.times.push_back(tau0);
  traj.states.push_back(pt0);
  Vec u = pt0.u, p = pt0.p;
  Vec k1u, k1p, k2u, k2p, k3u, k3p, k4u, k4p;
  for (long n = 1; n <= steps; ++n) {
    const bool stages = rhs(u, p, k1u, k1p) &&
                        rhs(u + 0.5 * h * k1u, p + 0.5 * h * k1p, k2u, k2p) &&
                        rhs(u + 0.5 * h * k2u, p + 0.5 * h * k2p, k3u, k3p) &&
                        rhs(u + h * k3u, p + h * k3p, k4u, k4p);
    const double tau = n == steps ? tau1 : tau0 + h * static_cast<double>(n);
    Vec nu, np;
    if (stages) {
      nu = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      np = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    if (!stages || !nu.allFinite() || !np.allFinite()) {
      throw DivergenceError("integrate: non-finite state at tau = " + io::format_double(tau),
                            tau - h, PhasePoint(u, p));
    }
    u = std::move(nu);
    p = std::move(np);
    if (n % opts.record_stride == 0 || n == steps) {
      traj.times.push_back(tau);
      traj.states.emplace_back(u, p);
    }
  }
  return traj;
}

double slow_time(const KappaSchedule& sched, double t, double tau_tilde) {
  const double k = sched(t);
  if (!(k < 1.0)) {
    throw SingularityError("slow_time: kappa(t) = 1, reparameterization is singular");
  }
  return tau_tilde / (1.0 - k);
}

nlohmann::ordered_json KinematicsReport::to_json() const {
  nlohmann::ordered_json j;
  j["max_speed"] = nlohmann::ordered_json::array();
  for (double v : max_speed) j["max_speed"].push_back(io::number(v));
  j["max_acceleration"] = nlohmann::ordered_json::array();
  for (double v : max_acceleration) j["max_acceleration"].push_back(io::number(v));
  j["max_on_shell_residual"] = io::number(max_on_shell_residual);
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : violations) {
    j["violations"].push_back({{"molecule", v.molecule},
                               {"index", v.index},
                               {"kind", v.kind},
                               {"value", io::number(v.value)}});
  }
  j["clean"] = clean();
  return j;
}

KinematicsReport kinematics_check(const Trajectory& traj, int d, const KinematicLimits& limits,
                                  const LorentzMetric& g4, const ObserverFrame& frame) {
  const std::size_t n = traj.states.size();
  if (n != traj.times.size()) throw ShapeError("kinematics_check: times/states length mismatch");
  if (n < 3) throw DomainError("kinematics_check: need at least 3 samples");
  if (g4.dim() != d) throw ShapeError("kinematics_check: metric dimension differs from d");
  const auto dim = traj.states.front().u.size();
  if (dim % (2 * d) != 0) throw ShapeError("kinematics_check: state length not a multiple of 2d");
  const int N = static_cast<int>(dim / (2 * d));
  const Mat G = observer_metric(g4, frame);
  auto norm = [&](const Vec& v) { return std::sqrt(std::max(0.0, v.dot(G * v))); };

  KinematicsReport rep;
  rep.max_speed.assign(N, 0.0);
  rep.max_acceleration.assign(N, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    if (!(traj.times[i] > traj.times[i - 1])) {
      throw DomainError("kinematics_check: times must be strictly increasing");
    }
  }
  for (int k = 0; k < N; ++k) {
    const Eigen::Index off = 2 * d * k;
    bool speed_flagged = false, accel_flagged = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dt = traj.times[i + 1] - traj.times[i];
      const Vec xdot =
          (traj.states[i + 1].u.segment(off, d) - traj.states[i].u.segment(off, d)) / dt;
      const double v = norm(xdot);
      rep.max_speed[k] = std::max(rep.max_speed[k], v);
      if (v > limits.c_max && !speed_flagged) {
        rep.violations.push_back({k, i, "speed", v});
        speed_flagged = true;
      }
      const Vec ymid =
          0.5 * (traj.states[i + 1].u.segment(off + d, d) + traj.states[i].u.segment(off + d, d));
      rep.max_on_shell_residual = std::max(rep.max_on_shell_residual, (xdot - ymid).norm());
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = traj.times[i] - traj.times[i - 1];
      const double h1 = traj.times[i + 1] - traj.times[i];
      const Vec xm = traj.states[i - 1].u.segment(off, d);
      const Vec x0 = traj.states[i].u.segment(off, d);
      const Vec xp = traj.states[i + 1].u.segment(off, d);
      const Vec acc = 2.0 * ((xp - x0) / h1 - (x0 - xm) / h0) / (h0 + h1);
      const double a = norm(acc);
      rep.max_acceleration[k] = std::max(rep.max_acceleration[k], a);
      if (a > limits.A_max && !accel_flagged) {
        rep.violations.push_back({k, i, "acceleration", a});
        accel_flagged = true;
      }
    }
  }
  return rep;
}

KinematicsReport kinematics_check(const Trajectory& traj, int d, const KinematicLimits& limits,
                                  const LorentzMetric& g4) {
  Vec W = Vec::Zero(d);
  W[0] = 1.0;
  return kinematics_check(traj, d, limits, g4, ObserverFrame{W});
}

double apparent_celerity(double v_tilde, double a, const KinematicLimits& limits) {
  if (!(v_tilde >= 0.0) || !(v_tilde < limits.c_max)) {
    throw KinematicDomainError("apparent_celerity: coordinate speed must lie in [0, c)");
  }
  if (!(a >= 0.0) || !(a < limits.A_max)) {
    throw KinematicDomainError("apparent_celerity: acceleration must lie in [0, A_max)");
  }
  const double ra = a / limits.A_max;
  const double rv = v_tilde / limits.c_max;
  return v_tilde / (std::sqrt(1.0 - ra * ra) * std::sqrt(1.0 - rv * rv));
}

std::pair<Vec, Vec> beta_split(const RandersStructure& s, const Vec& u) {
  const Vec b = s.beta()(u);
  const Vec tb = t_reflect_momentum(b, s.spacetime_dim());
  Vec bx = 0.5 * (b - tb);
  Vec by = b - bx;
  return {std::move(bx), std::move(by)};
}

BerwaldReport berwald_validator(const RandersStructure& s, const std::vector<Vec>& probes,
                                double tolerance) {
  BerwaldReport rep;
  rep.tolerance = tolerance;
  for (const auto& u : probes) {
    rep.max_gradient_norm = std::max(rep.max_gradient_norm, s.beta().jacobian(u).norm());
  }
  rep.passed = rep.max_gradient_norm < tolerance;
  return rep;
}

io::Table trajectory_table(const Trajectory& traj, int d) {
  std::vector<std::string> cols{"tau", "molecule_id"};
  for (const char* prefix : {"x", "y", "px", "py"}) {
    for (int i = 0; i < d; ++i) cols.push_back(prefix + std::to_string(i));
  }
  io::Table table(std::move(cols));
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& st = traj.states[i];
    const auto N = st.u.size() / (2 * d);
    for (Eigen::Index k = 0; k < N; ++k) {
      std::vector<io::Cell> row{traj.times[i], static_cast<std::int64_t>(k)};
      const Eigen::Index off = 2 * d * k;
      for (Eigen::Index j = 0; j < 2 * d; ++j) row.emplace_back(st.u[off + j]);
      for (Eigen::Index j = 0; j < 2 * d; ++j) row.emplace_back(st.p[off + j]);
      table.add_row(std::move(row));
    }
  }
  return table;
}

}  // namespace hrs
