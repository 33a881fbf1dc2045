#include "hrs/lipschitz.hpp"

#include <cmath>

#include "hrs/constants.hpp"
#include "hrs/error.hpp"
#include "hrs/parallel.hpp"
#include "hrs/rng.hpp"

namespace hrs {

Vec concat(const PhasePoint& pt) {
  Vec z(pt.u.size() + pt.p.size());
  z << pt.u, pt.p;
  return z;
}

nlohmann::ordered_json LipschitzCertificate::to_json() const {
  return {{"estimate", io::number(estimate)},
          {"passed", passed},
          {"normalization", io::number(normalization)},
          {"normalized_estimate", io::number(normalized_estimate)},
          {"passed_normalized", passed_normalized},
          {"pairs", pairs},
          {"distance", "l1"}};
}

namespace {

double eval_checked(const PhaseFunction& H, const Vec& z) {
  double v;
  try {
    v = H(z);
  } catch (const std::exception& ex) {
    throw DomainError(std::string("Lipschitz certification: evaluation failed inside K: ") +
                      ex.what());
  }
  if (!std::isfinite(v)) throw DomainError("Lipschitz certification: non-finite value inside K");
  return v;
}

Vec uniform_in(const Box& K, StreamRng& rng) {
  Vec z(K.size());
  for (int j = 0; j < K.size(); ++j) z[j] = rng.uniform(K.lo[j], K.hi[j]);
  return z;
}

}  // namespace

LipschitzCertificate certify_lipschitz_on_compact(const PhaseFunction& H, const Box& K,
                                                  const CertifyOptions& opts) {
  if (K.size() == 0 || K.hi.size() != K.size()) throw ShapeError("certify: malformed box");
  if (!((K.hi - K.lo).array() >= 0.0).all()) throw DomainError("certify: box has hi < lo");
  const int n = K.size();
  const std::size_t total = opts.pairs + opts.local_pairs;
  auto max_op = [](double a, double b) { return std::max(a, b); };
  const double est = chunked_reduce(
      total, 512, 0.0,
      [&](std::size_t b, std::size_t e) {
        double m = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          StreamRng rng(opts.seed, stream_id(0x11F5, i));
          Vec a = uniform_in(K, rng);
          Vec c;
          if (i < opts.pairs) {
            c = uniform_in(K, rng);
          } else {
            const int j = static_cast<int>(rng.next_u32() % static_cast<std::uint32_t>(n));
            const double width = K.hi[j] - K.lo[j];
            if (!(width > 0.0)) continue;
            const double h = opts.local_step * width;
            a[j] = std::min(a[j], K.hi[j] - h);
            c = a;
            c[j] = a[j] + h;
          }
          const double dist = (a - c).lpNorm<1>();
          if (!(dist > 0.0)) continue;
          m = std::max(m, std::abs(eval_checked(H, a) - eval_checked(H, c)) / dist);
        }
        return m;
      },
      max_op);
  LipschitzCertificate cert;
  cert.estimate = est;
  cert.passed = est <= 1.0;
  cert.pairs = total;
  cert.normalization = std::max(0.5, est * (1.0 + opts.slack));
  cert.normalized_estimate = est / cert.normalization;
  cert.passed_normalized = cert.normalized_estimate <= 1.0;
  return cert;
}

RadialProfile RadialProfile::rational(double s0) {
  if (!(s0 > 0.0)) throw ProfileError("rational profile: s0 must be positive");
  return {"rational(s0=" + io::format_double(s0) + ")",
          [s0](double s) { return 1.0 / (1.0 + s / s0); }};
}

RadialProfile RadialProfile::exponential(double scale) {
  if (!(scale > 0.0)) throw ProfileError("exponential profile: scale must be positive");
  return {"exponential(scale=" + io::format_double(scale) + ")",
          [scale](double s) { return std::exp(-s / scale); }};
}

RadialProfile RadialProfile::unit() {
  return {"unit", [](double) { return 1.0; }};
}

void RadialProfile::validate() const {
  if (!R) throw ProfileError("radial profile: missing function");
  if (R(0.0) != 1.0) throw ProfileError("radial profile: R(0) must equal 1");
  double prev = 1.0;
  for (int i = 1; i <= 2000; ++i) {
    const double x = i / 2000.0;
    const double r = R(50.0 * x * x);
    if (!(r > 0.0)) throw ProfileError("radial profile: R must be positive");
    if (r > prev) throw ProfileError("radial profile: R must be nonincreasing");
    prev = r;
  }
}

double distance_to_box(const Vec& z, const Box& K) {
  if (z.size() != K.size()) throw ShapeError("distance_to_box: dimension mismatch");
  return (z - K.clamp(z)).lpNorm<1>();
}

Decomposition radial_decompose(const PhaseFunction& H, const Box& K, const RadialProfile& profile) {
  profile.validate();
  Decomposition dec;
  dec.K = K;
  dec.profile = profile;
  auto R = profile.R;
  dec.lipschitz_part = [H, K, R](const Vec& z) {
    const Vec proj = K.clamp(z);
    const double s = (z - proj).lpNorm<1>();
    return s == 0.0 ? H(proj) : R(s) * H(proj);
  };
  auto lp = dec.lipschitz_part;
  dec.matter_part = [H, lp](const Vec& z) { return H(z) - lp(z); };
  return dec;
}

RadialProfile default_profile(const PhaseFunction& H, const Box& K, std::uint64_t seed,
                              std::size_t samples) {
  const double sup = chunked_reduce(
      samples, 1024, 0.0,
      [&](std::size_t b, std::size_t e) {
        double m = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          StreamRng rng(seed, stream_id(0x5A9, i));
          m = std::max(m, std::abs(H(uniform_in(K, rng))));
        }
        return m;
      },
      [](double a, double b) { return std::max(a, b); });
  double corner_sup = 0.0;
  const int n = K.size();
  if (n <= 16) {
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      Vec z(n);
      for (int j = 0; j < n; ++j) z[j] = (mask >> j) & 1u ? K.hi[j] : K.lo[j];
      corner_sup = std::max(corner_sup, std::abs(H(z)));
    }
  }
  const double m = std::max(sup, corner_sup);
  return RadialProfile::rational(m > 0.0 ? 1.1 * m : 1.0);
}

double decomposition_residual(const PhaseFunction& H, const Decomposition& dec,
                              const std::vector<Vec>& probes) {
  if (probes.empty()) throw DomainError("decomposition_residual: empty probe set");
  double worst = 0.0;
  for (const auto& z : probes) {
    worst = std::max(worst, std::abs(H(z) - (dec.lipschitz_part(z) + dec.matter_part(z))));
  }
  return worst;
}

double newton_alpha_compact(double lambda, double D_ratio, double E_ratio) {
  if (!(lambda > 0.0) || !(D_ratio > 0.0) || !(E_ratio > 0.0)) {
    throw DomainError("newton_alpha: inputs must be positive");
  }
  return (1.0 + lambda) / (lambda * lambda * lambda) * D_ratio * E_ratio;
}

NewtonAlpha newton_alpha(double m, double M_big, double r, double lambda) {
  if (!(m > 0.0) || !(M_big > 0.0) || !(r > 0.0) || !(lambda > 0.0)) {
    throw DomainError("newton_alpha: inputs must be positive");
  }
  using namespace constants;
  NewtonAlpha out;
  out.D_ratio = (m / (r * r * r)) / planck_density();
  out.E_ratio = (m * c * c) / planck_energy();
  out.compact = newton_alpha_compact(lambda, out.D_ratio, out.E_ratio);
  const double r2 = r;
  const double r1 = lambda * r;
  const double c4 = c * c * c * c;
  out.general = planck_length() * G * G * m * M_big * (r1 + r2) / (c4 * r1 * r1 * r2 * r2);
  return out;
}

}  // namespace hrs
