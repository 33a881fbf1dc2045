#include "hrs/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hrs/error.hpp"
#include "hrs/parallel.hpp"
#include "hrs/rng.hpp"
#include "hrs/stats.hpp"

namespace hrs {

double levy_mean(const std::vector<double>& samples) {
  if (samples.empty()) throw DomainError("levy_mean: empty sample set");
  return stats::median(samples);
}

BoundKind parse_bound_kind(std::string_view name) {
  if (name == "sphere") return BoundKind::sphere;
  if (name == "gaussian") return BoundKind::gaussian;
  if (name == "hr_scale") return BoundKind::hr_scale;
  throw DomainError("unknown bound kind '" + std::string(name) + "'");
}

double bound(BoundKind kind, const BoundParams& p) {
  switch (kind) {
    case BoundKind::sphere:
      if (!(p.N >= 2.0)) throw DomainError("sphere bound: N must be >= 2");
      if (!(p.epsilon > 0.0 && p.epsilon < 1.0)) {
        throw DomainError("sphere bound: epsilon must lie in (0, 1)");
      }
      return std::sqrt(std::numbers::pi / 2.0) *
             std::exp(-p.epsilon * p.epsilon * (p.N - 1.0) / 2.0);
    case BoundKind::gaussian:
      if (!(p.rho > 0.0) || !(p.rho_P > 0.0)) {
        throw DomainError("gaussian bound: rho and rho_P must be positive");
      }
      return 0.5 * std::exp(-p.rho * p.rho / (2.0 * p.rho_P * p.rho_P));
    case BoundKind::hr_scale:
      if (!(p.N >= 1.0)) throw DomainError("hr_scale bound: N must be >= 1");
      return 0.5 * std::exp(-32.0 * p.N * p.N);
  }
  return 0.0;
}

double sphere_bound_alt_constant(double N, double epsilon) {
  return std::sqrt(std::numbers::pi / 8.0) * std::exp(-epsilon * epsilon * (N - 1.0) / 2.0);
}

double binomial_margin(double p, std::size_t M) {
  const double q = std::clamp(p, 0.0, 1.0);
  return 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(M));
}

bool ConcentrationReport::all_pass() const {
  return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; });
}

io::Table ConcentrationReport::to_table() const {
  io::Table t({"rho", "empirical", "bound", "pass"});
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    t.add_row({rho_grid[i], empirical[i], bound[i], std::int64_t{pass[i] ? 1 : 0}});
  }
  return t;
}

nlohmann::ordered_json ConcentrationReport::to_json() const {
  nlohmann::ordered_json j;
  j["samples"] = samples;
  j["levy_mean"] = io::number(levy_mean);
  j["sigma_f"] = io::number(sigma_f);
  j["profile"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    j["profile"].push_back({{"rho", io::number(rho_grid[i])},
                            {"empirical", io::number(empirical[i])},
                            {"bound", io::number(bound[i])},
                            {"margin", io::number(margin[i])},
                            {"pass", static_cast<bool>(pass[i])}});
  }
  j["all_pass"] = all_pass();
  return j;
}

ConcentrationReport concentration_profile(const std::vector<double>& f_values,
                                          const std::vector<double>& rho_grid,
                                          const std::function<double(double)>& bound_at) {
  ConcentrationReport rep;
  rep.samples = f_values.size();
  rep.levy_mean = levy_mean(f_values);
  rep.rho_grid = rho_grid;
  std::vector<double> dev(f_values.size());
  for (std::size_t i = 0; i < f_values.size(); ++i) dev[i] = std::abs(f_values[i] - rep.levy_mean);
  std::sort(dev.begin(), dev.end());
  const double M = static_cast<double>(dev.size());
  for (double rho : rho_grid) {
    const auto above = dev.end() - std::upper_bound(dev.begin(), dev.end(), rho);
    const double frac = static_cast<double>(above) / M;
    rep.empirical.push_back(frac);
    if (bound_at) {
      const double b = bound_at(rho);
      const double m = binomial_margin(b, dev.size());
      rep.bound.push_back(b);
      rep.margin.push_back(m);
      rep.pass.push_back(frac <= b + m);
    } else {
      rep.bound.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.margin.push_back(0.0);
      rep.pass.push_back(true);
    }
  }
  return rep;
}

ConcentrationReport empirical_concentration(const std::function<double(const Vec&)>& f,
                                            const PointSampler& sampler, std::size_t count,
                                            const std::vector<double>& rho_grid,
                                            const std::function<double(double)>& bound_at) {
  if (count == 0) throw DomainError("empirical_concentration: sampler produced no points");
  std::vector<double> values(count);
  parallel_chunks(count, 1024, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) values[i] = f(sampler(i));
  });
  return concentration_profile(values, rho_grid, bound_at);
}

Vec gaussian_point(int dim, std::uint64_t seed, std::uint64_t index) {
  StreamRng rng(seed, stream_id(0x6A55, index));
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

Vec sphere_point(int N, std::uint64_t seed, std::uint64_t index) {
  if (N < 1) throw DomainError("sample_sphere: N must be >= 1");
  StreamRng rng(seed, stream_id(0x5E7E, index));
  Vec v(N + 1);
  double n = 0.0;
  while (!(n > 1e-150)) {
    for (int i = 0; i <= N; ++i) v[i] = rng.normal();
    n = v.norm();
  }
  return v / n;
}

Mat sample_sphere(int N, std::size_t M, std::uint64_t seed) {
  if (N < 1 || M < 1) throw DomainError("sample_sphere: need N >= 1 and M >= 1");
  Mat out(static_cast<Eigen::Index>(M), N + 1);
  parallel_chunks(M, 1024, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      out.row(static_cast<Eigen::Index>(i)) = sphere_point(N, seed, i).transpose();
    }
  });
  return out;
}

double euclidean_distance(const Vec& a, const Vec& b) { return (a - b).norm(); }
double l1_distance(const Vec& a, const Vec& b) { return (a - b).lpNorm<1>(); }

LipschitzEstimate empirical_lipschitz(const std::function<double(const Vec&)>& f,
                                      const std::vector<std::pair<Vec, Vec>>& pairs,
                                      const Metric& metric) {
  LipschitzEstimate est;
  for (const auto& [a, b] : pairs) {
    const double dist = metric(a, b);
    if (!(dist > 0.0)) {
      ++est.skipped;
      continue;
    }
    est.estimate = std::max(est.estimate, std::abs(f(a) - f(b)) / dist);
    ++est.pairs_used;
  }
  return est;
}

nlohmann::ordered_json CollapseMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["variance_start"] = io::number(variance_start);
  j["variance_ergodic_end"] = io::number(variance_ergodic_end);
  j["variance_contractive_end"] = io::number(variance_contractive_end);
  j["variance_expansive_end"] = io::number(variance_expansive_end);
  j["contraction_ratio"] = io::number(contraction_ratio);
  j["spread_over_sigma_f"] = io::number(spread_over_sigma);
  j["sigma_f"] = io::number(sigma_f);
  j["collapsed"] = collapsed;
  j["rho_over_rho_P"] = io::number(rho_over_rho_P);
  j["hr_scale_bound"] = io::number(hr_scale_bound);
  return j;
}

CollapseMetrics collapse_metrics(const CycleRecord& record, double sigma_f, double threshold,
                                 int N) {
  if (!(sigma_f > 0.0)) throw DomainError("collapse_metrics: sigma_f must be positive");
  CollapseMetrics c;
  c.sigma_f = sigma_f;
  c.variance_start = record.variance_start;
  c.variance_ergodic_end = record.variance_ergodic_end;
  c.variance_contractive_end = record.variance_contractive_end;
  c.variance_expansive_end = record.variance_expansive_end;
  c.contraction_ratio = record.variance_ergodic_end > 0.0
                            ? record.variance_contractive_end / record.variance_ergodic_end
                            : 0.0;
  c.spread_over_sigma = std::sqrt(record.variance_contractive_end) / sigma_f;
  c.collapsed = record.contraction && c.spread_over_sigma < threshold;
  c.rho_over_rho_P = static_cast<double>(N);
  c.hr_scale_bound = bound(BoundKind::hr_scale, {static_cast<double>(std::max(N, 1)), 0, 0, 1});
  for (const auto& snap : record.snapshots) {
    if (snap.phase == CyclePhase::contractive) c.contraction_curve.push_back(snap.variance);
  }
  return c;
}

}  // namespace hrs
