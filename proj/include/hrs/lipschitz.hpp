#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hrs/geometry.hpp"
#include "hrs/io.hpp"

namespace hrs {

// Scalar function of the concatenated phase coordinates z = (u, p).
using PhaseFunction = std::function<double(const Vec&)>;

Vec concat(const PhasePoint& pt);

struct CertifyOptions {
  std::size_t pairs = 10000;     // global pairs drawn uniformly in K
  std::size_t local_pairs = 10000;  // axis-aligned pairs at small separation
  double local_step = 1e-4;      // relative to the box width per axis
  double slack = 0.05;
  std::uint64_t seed = 7;
};

struct LipschitzCertificate {
  double estimate = 0.0;      // l1 empirical Lipschitz constant on K
  bool passed = false;        // estimate <= 1
  double normalization = 1.0; // M = max(1/2, estimate (1 + slack))
  double normalized_estimate = 0.0;
  bool passed_normalized = false;
  std::size_t pairs = 0;

  nlohmann::ordered_json to_json() const;
};

LipschitzCertificate certify_lipschitz_on_compact(const PhaseFunction& H, const Box& K,
                                                  const CertifyOptions& opts = {});

struct RadialProfile {
  std::string name;
  std::function<double(double)> R;

  static RadialProfile rational(double s0);     // 1 / (1 + s/s0)
  static RadialProfile exponential(double scale);  // exp(-s/scale)
  static RadialProfile unit();                  // R = 1
  // Throws ProfileError unless R(0) = 1 and R is positive and nonincreasing
  // on a sampling grid.
  void validate() const;
};

struct Decomposition {
  PhaseFunction lipschitz_part;
  PhaseFunction matter_part;
  Box K;
  RadialProfile profile;
  double lipschitz_constant_estimate = 0.0;
};

// l1 distance from z to its coordinate clamp onto K.
double distance_to_box(const Vec& z, const Box& K);

// lipschitz_part(z) = R(dist(z, K)) H(clamp(z)); matter_part = H - lipschitz_part.
Decomposition radial_decompose(const PhaseFunction& H, const Box& K, const RadialProfile& profile);

// Default R = 1/(1 + s/s0) with s0 = 1.1 * sup_K |H| over random samples and,
// for up to 16 dimensions, the vertices of K.
RadialProfile default_profile(const PhaseFunction& H, const Box& K, std::uint64_t seed = 11,
                              std::size_t samples = 10000);

double decomposition_residual(const PhaseFunction& H, const Decomposition& dec,
                              const std::vector<Vec>& probes);

struct NewtonAlpha {
  double compact = 0.0;  // (1 + lambda)/lambda^3 (D/D_p)(E/E_p)
  double general = 0.0;  // l_p G^2 m M (r1 + r2) / (c^4 r1^2 r2^2), r1 = lambda r
  double D_ratio = 0.0;
  double E_ratio = 0.0;
};

// SI inputs; r is r2 and r1 = lambda r.
NewtonAlpha newton_alpha(double m, double M_big, double r, double lambda);
// The compact form from dimensionless ratios directly.
double newton_alpha_compact(double lambda, double D_ratio, double E_ratio);

}  // namespace hrs
