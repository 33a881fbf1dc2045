#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "hrs/geometry.hpp"
#include "hrs/io.hpp"

namespace hrs {

enum class KappaProfile { smoothstep, linear, cosine };

KappaProfile parse_kappa_profile(std::string_view name);
std::string_view to_string(KappaProfile profile);

// kappa on [0, T] with kappa(0) = 0 and kappa(T) = 1 exactly.
struct KappaSchedule {
  double T = 1.0;
  KappaProfile profile = KappaProfile::smoothstep;

  KappaSchedule() = default;
  KappaSchedule(double T_, KappaProfile profile_ = KappaProfile::smoothstep);

  // Throws ScheduleDomainError outside [0, T].
  double operator()(double t) const;
};

// State-dependent kappa(t, point), used to probe the commutation property.
using StateKappa = std::function<double(double, const PhasePoint&)>;

// (x, y, p_x, p_y) -> (x, -y, -p_x, p_y) with d components per sector.
PhasePoint t_inversion(const PhasePoint& pt, int d);
// Reflection acting on a momentum-like vector: negates the position sector.
Vec t_reflect_momentum(const Vec& p, int d);

// h is the averaged metric evaluated at pt.u.
double ut_deform(const RandersStructure& s, const Mat& h, const KappaSchedule& sched, double t,
                 const PhasePoint& pt);
double ut_deform(const RandersStructure& s, const Mat& h, double kappa, const PhasePoint& pt);

// (1 - kappa(t)) beta(u) . p, after checking that pt and its reflection lie
// in the closed cone.
double ht_classical(const RandersStructure& s, const Mat& h, const KappaSchedule& sched, double t,
                    const PhasePoint& pt);
// The two-point form F_t(pt)/2 - F_t(T pt)/2, evaluated literally.
double ht_two_point(const RandersStructure& s, const Mat& h, const KappaSchedule& sched, double t,
                    const PhasePoint& pt);

double metastable_residual(const RandersStructure& s, const Mat& h, const KappaSchedule& sched,
                           const std::vector<PhasePoint>& probes, double t);

struct CommutationReport {
  double max_discrepancy = 0.0;
  std::size_t probes = 0;
  bool passed = false;  // max_discrepancy < tolerance
  double tolerance = 1e-10;
};

// Compares F_t at the reflected point evaluated with kappa taken at pt
// against kappa taken at the reflected point.
CommutationReport commutation_check(const RandersStructure& s, const Mat& h, const StateKappa& kappa,
                                    double t, const std::vector<PhasePoint>& probes,
                                    double tolerance = 1e-10);
CommutationReport commutation_check(const RandersStructure& s, const Mat& h,
                                    const KappaSchedule& sched, double t,
                                    const std::vector<PhasePoint>& probes,
                                    double tolerance = 1e-10);

struct FlowSnapshot {
  double t = 0.0;
  double residual = 0.0;
  std::function<double(const PhasePoint&)> F_t;
};

FlowSnapshot flow_snapshot(const RandersStructure& s, const Mat& h, const KappaSchedule& sched,
                           double t, const std::vector<PhasePoint>& probes);

// Rows (t, kappa, residual) at `points` evenly spaced times in [0, T].
io::Table residual_sweep(const RandersStructure& s, const Mat& h, const KappaSchedule& sched,
                         const std::vector<PhasePoint>& probes, int points);

}  // namespace hrs
