#include "hrs/flow.hpp"

#include <cmath>
#include <numbers>

#include "hrs/error.hpp"
#include "hrs/parallel.hpp"

namespace hrs {

KappaProfile parse_kappa_profile(std::string_view name) {
  if (name == "smoothstep") return KappaProfile::smoothstep;
  if (name == "linear") return KappaProfile::linear;
  if (name == "cosine") return KappaProfile::cosine;
  throw DomainError("unknown kappa profile '" + std::string(name) +
                    "' (expected smoothstep|linear|cosine)");
}

std::string_view to_string(KappaProfile profile) {
  switch (profile) {
    case KappaProfile::smoothstep: return "smoothstep";
    case KappaProfile::linear: return "linear";
    case KappaProfile::cosine: return "cosine";
  }
  return "unknown";
}

KappaSchedule::KappaSchedule(double T_, KappaProfile profile_) : T(T_), profile(profile_) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("KappaSchedule: T must be positive");
}

double KappaSchedule::operator()(double t) const {
  if (!(t >= 0.0 && t <= T)) {
    throw ScheduleDomainError("kappa: t = " + io::format_double(t) + " outside [0, " +
                              io::format_double(T) + "]");
  }
  if (t == 0.0) return 0.0;
  if (t == T) return 1.0;
  const double s = t / T;
  double k = 0.0;
  switch (profile) {
    case KappaProfile::smoothstep: k = s * s * (3.0 - 2.0 * s); break;
    case KappaProfile::linear: k = s; break;
    case KappaProfile::cosine: k = 0.5 * (1.0 - std::cos(std::numbers::pi * s)); break;
  }
  return std::clamp(k, 0.0, 1.0);
}

Vec t_reflect_momentum(const Vec& p, int d) {
  Vec out = p;
  const Eigen::Index block = 2 * d;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (i % block < d) out[i] = -out[i];
  }
  return out;
}

PhasePoint t_inversion(const PhasePoint& pt, int d) {
  PhasePoint out = pt;
  const Eigen::Index block = 2 * d;
  for (Eigen::Index i = 0; i < out.u.size(); ++i) {
    if (i % block >= d) out.u[i] = -out.u[i];
  }
  out.p = t_reflect_momentum(pt.p, d);
  return out;
}

double ut_deform(const RandersStructure& s, const Mat& h, double kappa, const PhasePoint& pt) {
  if (h.rows() != s.size() || h.cols() != s.size()) {
    throw ShapeError("ut_deform: averaged metric has wrong shape");
  }
  const double F = hr_value(s, pt);
  const double hv = pt.p.dot(h * pt.p);
  return std::sqrt(kappa * std::abs(hv) + (1.0 - kappa) * std::abs(F * F));
}

double ut_deform(const RandersStructure& s, const Mat& h, const KappaSchedule& sched, double t,
                 const PhasePoint& pt) {
  return ut_deform(s, h, sched(t), pt);
}

namespace {

void require_reflection_in_cone(const RandersStructure& s, const PhasePoint& pt) {
  if (alpha_squared(s, pt) < 0.0) {
    throw ConeDomainError("ht: momentum outside the closed timelike cone");
  }
  const PhasePoint r = t_inversion(pt, s.spacetime_dim());
  if (alpha_squared(s, r) < 0.0) {
    throw ConeDomainError("ht: time-inverted point leaves the closed timelike cone");
  }
}

}  // namespace

double ht_classical(const RandersStructure& s, const Mat& /*h*/, const KappaSchedule& sched,
                    double t, const PhasePoint& pt) {
  const double k = sched(t);
  require_reflection_in_cone(s, pt);
  if (k == 1.0) return 0.0;
  return (1.0 - k) * s.beta()(pt.u).dot(pt.p);
}

double ht_two_point(const RandersStructure& s, const Mat& h, const KappaSchedule& sched, double t,
                    const PhasePoint& pt) {
  require_reflection_in_cone(s, pt);
  const double k = sched(t);
  const PhasePoint r = t_inversion(pt, s.spacetime_dim());
  return 0.5 * ut_deform(s, h, k, pt) - 0.5 * ut_deform(s, h, k, r);
}

double metastable_residual(const RandersStructure& s, const Mat& h, const KappaSchedule& sched,
                           const std::vector<PhasePoint>& probes, double t) {
  if (probes.empty()) throw DomainError("metastable_residual: empty probe set");
  return chunked_reduce(
      probes.size(), 256, 0.0,
      [&](std::size_t b, std::size_t e) {
        double m = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          m = std::max(m, std::abs(ht_classical(s, h, sched, t, probes[i])));
        }
        return m;
      },
      [](double a, double b) { return std::max(a, b); });
}

CommutationReport commutation_check(const RandersStructure& s, const Mat& h, const StateKappa& kappa,
                                    double t, const std::vector<PhasePoint>& probes,
                                    double tolerance) {
  CommutationReport rep;
  rep.tolerance = tolerance;
  rep.probes = probes.size();
  const int d = s.spacetime_dim();
  for (const auto& pt : probes) {
    const PhasePoint r = t_inversion(pt, d);
    // Deform first (kappa fixed at the original point), then reflect.
    const double a = ut_deform(s, h, kappa(t, pt), r);
    // Reflect first, then deform with kappa read at the reflected point.
    const double b = ut_deform(s, h, kappa(t, r), r);
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(a - b));
  }
  rep.passed = rep.max_discrepancy < tolerance;
  return rep;
}

CommutationReport commutation_check(const RandersStructure& s, const Mat& h,
                                    const KappaSchedule& sched, double t,
                                    const std::vector<PhasePoint>& probes, double tolerance) {
  return commutation_check(
      s, h, [&](double tt, const PhasePoint&) { return sched(tt); }, t, probes, tolerance);
}

FlowSnapshot flow_snapshot(const RandersStructure& s, const Mat& h, const KappaSchedule& sched,
                           double t, const std::vector<PhasePoint>& probes) {
  FlowSnapshot snap;
  snap.t = t;
  snap.residual = metastable_residual(s, h, sched, probes, t);
  const double k = sched(t);
  snap.F_t = [s, h, k](const PhasePoint& pt) { return ut_deform(s, h, k, pt); };
  return snap;
}

io::Table residual_sweep(const RandersStructure& s, const Mat& h, const KappaSchedule& sched,
                         const std::vector<PhasePoint>& probes, int points) {
  if (points < 2) throw DomainError("residual_sweep: need at least 2 points");
  io::Table table({"t", "kappa", "residual"});
  for (int i = 0; i < points; ++i) {
    const double t = i == points - 1 ? sched.T : sched.T * i / (points - 1);
    table.add_row({t, sched(t), metastable_residual(s, h, sched, probes, t)});
  }
  return table;
}

}  // namespace hrs
