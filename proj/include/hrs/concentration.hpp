#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "hrs/ensemble.hpp"
#include "hrs/geometry.hpp"
#include "hrs/io.hpp"

namespace hrs {

double levy_mean(const std::vector<double>& samples);

enum class BoundKind { sphere, gaussian, hr_scale };
BoundKind parse_bound_kind(std::string_view name);

struct BoundParams {
  double N = 0.0;       // sphere: ambient dimension; hr_scale: molecule count
  double epsilon = 0.0;
  double rho = 0.0;
  double rho_P = 1.0;
};

// sphere:   sqrt(pi/2) exp(-eps^2 (N-1) / 2)
// gaussian: exp(-rho^2 / (2 rho_P^2)) / 2
// hr_scale: exp(-32 N^2) / 2
double bound(BoundKind kind, const BoundParams& params);
// The sphere form with the sqrt(pi/8) constant, kept for comparison.
double sphere_bound_alt_constant(double N, double epsilon);

// Binomial 3-sigma margin for a tail probability p estimated from M samples.
double binomial_margin(double p, std::size_t M);

struct ConcentrationReport {
  std::vector<double> rho_grid;
  std::vector<double> empirical;
  std::vector<double> bound;
  std::vector<double> margin;
  std::vector<bool> pass;
  double levy_mean = 0.0;
  double sigma_f = 0.0;
  std::size_t samples = 0;

  bool all_pass() const;
  io::Table to_table() const;
  nlohmann::ordered_json to_json() const;
};

// Fraction of samples with |f - median| > rho for each rho. Without a bound
// the bound column is NaN and pass is true.
ConcentrationReport concentration_profile(const std::vector<double>& f_values,
                                          const std::vector<double>& rho_grid,
                                          const std::function<double(double)>& bound_at = {});

using PointSampler = std::function<Vec(std::uint64_t index)>;

// Evaluates f on `count` sampler points (deterministic for any thread count)
// and builds the profile.
ConcentrationReport empirical_concentration(const std::function<double(const Vec&)>& f,
                                            const PointSampler& sampler, std::size_t count,
                                            const std::vector<double>& rho_grid,
                                            const std::function<double(double)>& bound_at = {});

// M x (N+1) matrix whose rows are uniform on S^N.
Mat sample_sphere(int N, std::size_t M, std::uint64_t seed);
Vec sphere_point(int N, std::uint64_t seed, std::uint64_t index);
Vec gaussian_point(int dim, std::uint64_t seed, std::uint64_t index);

using Metric = std::function<double(const Vec&, const Vec&)>;
double euclidean_distance(const Vec& a, const Vec& b);
double l1_distance(const Vec& a, const Vec& b);

struct LipschitzEstimate {
  double estimate = 0.0;
  std::size_t pairs_used = 0;
  std::size_t skipped = 0;  // coincident pairs
};

LipschitzEstimate empirical_lipschitz(const std::function<double(const Vec&)>& f,
                                      const std::vector<std::pair<Vec, Vec>>& pairs,
                                      const Metric& metric);

struct CollapseMetrics {
  double variance_start = 0.0;
  double variance_ergodic_end = 0.0;
  double variance_contractive_end = 0.0;
  double variance_expansive_end = 0.0;
  double contraction_ratio = 0.0;  // contractive_end / ergodic_end
  double spread_over_sigma = 0.0;  // sqrt(contractive_end) / sigma_f
  double sigma_f = 0.0;
  bool collapsed = false;
  double rho_over_rho_P = 0.0;     // N, from rho^2 / rho_P^2 = N^2
  double hr_scale_bound = 0.0;
  std::vector<double> contraction_curve;  // variances over the contractive span

  nlohmann::ordered_json to_json() const;
};

CollapseMetrics collapse_metrics(const CycleRecord& record, double sigma_f, double threshold = 1.0,
                                 int N = 1);

}  // namespace hrs
