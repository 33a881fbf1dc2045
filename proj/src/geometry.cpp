#include "hrs/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "hrs/error.hpp"
#include "hrs/parallel.hpp"
#include "hrs/rng.hpp"

namespace hrs {
namespace {

constexpr double kSymTol = 1e-12;

void require_square_symmetric(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ShapeError(std::string(what) + ": expected a non-empty square matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale) {
    throw SignatureError(std::string(what) + ": matrix is not symmetric");
  }
}

}  // namespace

void check_lorentz_signature(const Mat& g) {
  require_square_symmetric(g, "LorentzMetric");
  if (g.rows() < 2) throw SignatureError("LorentzMetric: dimension must be at least 2");
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  int pos = 0, neg = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > tol) ++pos;
    else if (ev[i] < -tol) ++neg;
  }
  if (pos != 1 || neg != g.rows() - 1) {
    throw SignatureError("LorentzMetric: signature must be (+, -, ..., -); found " +
                         std::to_string(pos) + " positive and " + std::to_string(neg) +
                         " negative eigenvalues");
  }
}

LorentzMetric LorentzMetric::minkowski(int dim) {
  if (dim < 2) throw SignatureError("LorentzMetric: dimension must be at least 2");
  Mat g = -Mat::Identity(dim, dim);
  g(0, 0) = 1.0;
  return LorentzMetric(std::move(g));
}

LorentzMetric LorentzMetric::constant(const Mat& components) {
  check_lorentz_signature(components);
  return LorentzMetric(0.5 * (components + components.transpose()));
}

Mat sasaki_block_metric(const LorentzMetric& g4) {
  check_lorentz_signature(g4.components());
  const int d = g4.dim();
  const Mat inv = g4.components().inverse();
  Mat block = Mat::Zero(2 * d, 2 * d);
  block.topLeftCorner(d, d) = inv;
  block.bottomRightCorner(d, d) = inv;
  return 0.5 * (block + block.transpose());
}

DriftField DriftField::constant(Vec b) {
  DriftField f;
  f.family_ = Family::constant;
  f.n_ = static_cast<int>(b.size());
  f.b_ = std::move(b);
  return f;
}

DriftField DriftField::linear(Mat A, Vec b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw ShapeError("DriftField::linear: A must be n x n with n = len(b)");
  }
  DriftField f;
  f.family_ = Family::linear;
  f.n_ = static_cast<int>(b.size());
  f.A_ = std::move(A);
  f.b_ = std::move(b);
  return f;
}

DriftField DriftField::sinusoidal(Vec b, Vec a, Mat W, Vec phi) {
  const auto n = b.size();
  if (a.size() != n || phi.size() != n || W.rows() != n || W.cols() != n) {
    throw ShapeError("DriftField::sinusoidal: b, a, phi must have length n and W be n x n");
  }
  DriftField f;
  f.family_ = Family::sinusoidal;
  f.n_ = static_cast<int>(n);
  f.b_ = std::move(b);
  f.a_ = std::move(a);
  f.A_ = std::move(W);
  f.phi_ = std::move(phi);
  return f;
}

DriftField DriftField::custom(int n, std::function<Vec(const Vec&)> fn) {
  DriftField f;
  f.family_ = Family::custom;
  f.n_ = n;
  f.fn_ = std::move(fn);
  return f;
}

std::string DriftField::family_name() const {
  switch (family_) {
    case Family::constant: return "constant";
    case Family::linear: return "linear";
    case Family::sinusoidal: return "sinusoidal";
    case Family::custom: return "custom";
  }
  return "unknown";
}

Vec DriftField::operator()(const Vec& u) const {
  if (u.size() != n_) throw ShapeError("DriftField: point has wrong dimension");
  switch (family_) {
    case Family::constant: return b_;
    case Family::linear: return A_ * u + b_;
    case Family::sinusoidal: {
      const Vec arg = A_ * u + phi_;
      return b_ + a_.cwiseProduct(arg.array().sin().matrix());
    }
    case Family::custom: {
      Vec v = fn_(u);
      if (v.size() != n_) throw ShapeError("DriftField: custom callback returned wrong length");
      return v;
    }
  }
  return b_;
}

Mat DriftField::jacobian(const Vec& u) const {
  if (u.size() != n_) throw ShapeError("DriftField: point has wrong dimension");
  switch (family_) {
    case Family::constant: return Mat::Zero(n_, n_);
    case Family::linear: return A_;
    case Family::sinusoidal: {
      const Vec c = (A_ * u + phi_).array().cos().matrix();
      return a_.cwiseProduct(c).asDiagonal() * A_;
    }
    case Family::custom: break;
  }
  throw CapabilityError("DriftField: family 'custom' provides no Jacobian");
}

DriftField DriftField::tiled(int N) const {
  if (N < 1) throw DomainError("DriftField::tiled: N must be positive");
  if (N == 1) return *this;
  const int total = n_ * N;
  auto repeat = [&](const Vec& v) {
    Vec out(total);
    for (int k = 0; k < N; ++k) out.segment(k * n_, n_) = v;
    return out;
  };
  auto block_diag = [&](const Mat& m) {
    Mat out = Mat::Zero(total, total);
    for (int k = 0; k < N; ++k) out.block(k * n_, k * n_, n_, n_) = m;
    return out;
  };
  switch (family_) {
    case Family::constant: return constant(repeat(b_));
    case Family::linear: return linear(block_diag(A_), repeat(b_));
    case Family::sinusoidal: return sinusoidal(repeat(b_), repeat(a_), block_diag(A_), repeat(phi_));
    case Family::custom: break;
  }
  const int n = n_;
  auto fn = fn_;
  return custom(total, [fn, n, N](const Vec& u) {
    Vec out(n * N);
    for (int k = 0; k < N; ++k) out.segment(k * n, n) = fn(u.segment(k * n, n));
    return out;
  });
}

Box Box::cube(int n, double half_width) {
  return Box{Vec::Constant(n, -half_width), Vec::Constant(n, half_width)};
}

bool Box::contains(const Vec& v) const {
  return (v.array() >= lo.array()).all() && (v.array() <= hi.array()).all();
}

Vec Box::clamp(const Vec& v) const { return v.cwiseMax(lo).cwiseMin(hi); }

Box Box::scaled(double factor) const {
  const Vec c = 0.5 * (lo + hi);
  const Vec h = 0.5 * (hi - lo) * factor;
  return Box{c - h, c + h};
}

RandersStructure::RandersStructure(const LorentzMetric& g4, int N, DriftField beta)
    : N_(N), d_(g4.dim()), beta_(std::move(beta)) {
  if (N < 1) throw DomainError("RandersStructure: N must be >= 1");
  const Mat block = sasaki_block_metric(g4);
  const int n = 2 * d_ * N;
  eta_ = Mat::Zero(n, n);
  for (int k = 0; k < N; ++k) eta_.block(2 * d_ * k, 2 * d_ * k, 2 * d_, 2 * d_) = block;
  eta_lower_ = Mat::Zero(n, n);
  const Mat lower = block.inverse();
  for (int k = 0; k < N; ++k) eta_lower_.block(2 * d_ * k, 2 * d_ * k, 2 * d_, 2 * d_) = lower;
  if (beta_.size() != n) {
    throw ShapeError("RandersStructure: beta has length " + std::to_string(beta_.size()) +
                     ", expected 2dN = " + std::to_string(n));
  }
}

RandersStructure::RandersStructure(int N, int d, Mat eta, DriftField beta)
    : N_(N), d_(d), eta_(std::move(eta)), beta_(std::move(beta)) {
  if (N < 1 || d < 1) throw DomainError("RandersStructure: N and d must be >= 1");
  require_square_symmetric(eta_, "RandersStructure eta");
  if (eta_.rows() != 2 * d * N) throw ShapeError("RandersStructure: eta must be 2dN x 2dN");
  if (beta_.size() != eta_.rows()) throw ShapeError("RandersStructure: beta length mismatch");
  Eigen::FullPivLU<Mat> lu(eta_);
  if (!lu.isInvertible()) throw SignatureError("RandersStructure: eta is singular");
  eta_lower_ = lu.inverse();
  eta_lower_ = 0.5 * (eta_lower_ + eta_lower_.transpose()).eval();
}

double RandersStructure::check_randers_bound(const Box& region, int samples,
                                             std::uint64_t seed) const {
  if (region.size() != size()) throw ShapeError("check_randers_bound: box dimension mismatch");
  const auto chunk = std::size_t{256};
  const double worst = chunked_reduce(
      static_cast<std::size_t>(samples), chunk, -std::numeric_limits<double>::infinity(),
      [&](std::size_t b, std::size_t e) {
        double m = -std::numeric_limits<double>::infinity();
        Vec u(size());
        for (std::size_t i = b; i < e; ++i) {
          StreamRng rng(seed, stream_id(0xB0D, i));
          for (int j = 0; j < size(); ++j) u[j] = rng.uniform(region.lo[j], region.hi[j]);
          const Vec bt = beta_(u);
          m = std::max(m, bt.dot(eta_lower_ * bt));
        }
        return m;
      },
      [](double a, double b) { return std::max(a, b); });
  if (!(worst < 1.0)) {
    throw RandersBoundError("Randers bound violated: max eta*(beta, beta) = " +
                            std::to_string(worst) + " >= 1");
  }
  return worst;
}

void check_phase_point(const RandersStructure& s, const PhasePoint& pt) {
  if (pt.u.size() != s.size() || pt.p.size() != s.size()) {
    throw ShapeError("PhasePoint: expected coordinate arrays of length " +
                     std::to_string(s.size()));
  }
  if (!pt.u.allFinite() || !pt.p.allFinite()) throw DomainError("PhasePoint: non-finite entry");
}

double alpha_squared(const RandersStructure& s, const PhasePoint& pt) {
  check_phase_point(s, pt);
  return pt.p.dot(s.eta() * pt.p);
}

bool cone_contains(const RandersStructure& s, const PhasePoint& pt) {
  return alpha_squared(s, pt) > 0.0;
}

double hr_value(const RandersStructure& s, const PhasePoint& pt) {
  const double a2 = alpha_squared(s, pt);
  if (a2 < 0.0) throw ConeDomainError("hr_value: momentum outside the timelike cone");
  return std::sqrt(a2) + s.beta()(pt.u).dot(pt.p);
}

Vec half_f2_gradient(const RandersStructure& s, const PhasePoint& pt) {
  const Vec ep = s.eta() * pt.p;
  const double a2 = pt.p.dot(ep);
  if (!(a2 > 0.0)) throw SingularityError("fundamental tensor: alpha vanishes or is imaginary");
  const double a = std::sqrt(a2);
  const Vec b = s.beta()(pt.u);
  const double F = a + b.dot(pt.p);
  return F * (ep / a + b);
}

Mat fundamental_tensor(const RandersStructure& s, const PhasePoint& pt) {
  const double a2 = alpha_squared(s, pt);
  if (!(a2 > 0.0)) throw SingularityError("fundamental_tensor: point on or outside the cone");
  const int n = s.size();
  const double h = 1e-5 * std::max(1.0, pt.p.norm());
  Mat g(n, n);
  PhasePoint q = pt;
  for (int j = 0; j < n; ++j) {
    q.p[j] = pt.p[j] + h;
    const Vec plus = half_f2_gradient(s, q);
    q.p[j] = pt.p[j] - h;
    const Vec minus = half_f2_gradient(s, q);
    q.p[j] = pt.p[j];
    g.col(j) = (plus - minus) / (2.0 * h);
  }
  return 0.5 * (g + g.transpose());
}

HyperboloidSampler::Basis HyperboloidSampler::prepare(const Mat& eta) {
  Eigen::SelfAdjointEigenSolver<Mat> es(eta);
  Basis basis{es.eigenvectors(), es.eigenvalues(), {}, {}};
  const Vec& lam = basis.lambda;
  const double tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] > tol) basis.positive.push_back(i);
    else if (lam[i] < -tol) basis.negative.push_back(i);
    else throw SamplingError("HyperboloidSampler: degenerate metric (zero eigenvalue)");
  }
  if (basis.positive.empty()) {
    throw SamplingError("HyperboloidSampler: metric has no timelike direction");
  }
  return basis;
}

HyperboloidSampler::Sample HyperboloidSampler::draw(const Basis& basis,
                                                    std::uint64_t index) const {
  const auto& pos = basis.positive;
  const auto& neg = basis.negative;
  const Vec& lam = basis.lambda;
  StreamRng rng(seed, stream_id(0x4879, index));
  Vec w(static_cast<Eigen::Index>(pos.size()));
  double wn = 0.0;
  while (wn < 1e-300) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = rng.normal();
    wn = w.norm();
  }
  w /= wn;
  Vec b(static_cast<Eigen::Index>(neg.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = sigma_b * rng.normal();
  const double r = b.norm();
  const double ch = std::cosh(r);
  const double sh_over_r = r > 1e-12 ? std::sinh(r) / r : 1.0;

  Vec c = Vec::Zero(lam.size());
  for (std::size_t i = 0; i < pos.size(); ++i) {
    c[pos[i]] = ch * w[static_cast<Eigen::Index>(i)] / std::sqrt(lam[pos[i]]);
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    c[neg[i]] = sh_over_r * b[static_cast<Eigen::Index>(i)] / std::sqrt(-lam[neg[i]]);
  }
  Vec p = basis.Q * c;
  if (transform) p = transform(p);
  return {std::move(p), 1.0};
}

Mat averaged_metric(const RandersStructure& s, const Vec& u, const HyperboloidSampler& sampler) {
  if (sampler.count < 1) throw SamplingError("averaged_metric: sampler draws no points");
  if (u.size() != s.size()) throw ShapeError("averaged_metric: point has wrong dimension");
  const int n = s.size();
  struct Acc {
    Mat sum;
    double weight;
  };
  const Acc zero{Mat::Zero(n, n), 0.0};
  const auto basis = HyperboloidSampler::prepare(s.eta());
  const Acc total = chunked_reduce(
      static_cast<std::size_t>(sampler.count), 1024, zero,
      [&](std::size_t b, std::size_t e) {
        Acc acc = zero;
        for (std::size_t m = b; m < e; ++m) {
          auto smp = sampler.draw(basis, m);
          acc.sum += smp.weight * fundamental_tensor(s, PhasePoint(u, smp.p));
          acc.weight += smp.weight;
        }
        return acc;
      },
      [](const Acc& a, const Acc& b) { return Acc{a.sum + b.sum, a.weight + b.weight}; });
  if (!(total.weight > 0.0)) throw SamplingError("averaged_metric: zero total weight");
  Mat h = total.sum / total.weight;
  return 0.5 * (h + h.transpose());
}

Mat observer_metric_raw(const LorentzMetric& g4, const ObserverFrame& frame) {
  const Mat& g = g4.components();
  if (frame.W.size() != g.rows()) throw ShapeError("observer_metric: W has wrong dimension");
  const double ww = frame.W.dot(g * frame.W);
  if (!(ww > 0.0)) throw FrameError("observer_metric: W is not timelike (eta(W, W) <= 0)");
  const Vec gw = g * frame.W;
  return g - 2.0 * gw * gw.transpose() / ww;
}

Mat observer_metric(const LorentzMetric& g4, const ObserverFrame& frame) {
  Mat m = -observer_metric_raw(g4, frame);
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success) {
    throw FrameError("observer_metric: induced metric is not positive definite");
  }
  return m;
}

double distance_to_worldline(const Vec& x, const std::vector<Vec>& line, const LorentzMetric& g4,
                             const ObserverFrame& frame) {
  if (line.empty()) throw DomainError("distance_to_worldline: empty world line");
  const Mat G = observer_metric(g4, frame);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : line) {
    if (y.size() != x.size()) throw ShapeError("distance_to_worldline: dimension mismatch");
    const Vec v = x - y;
    best = std::min(best, std::sqrt(std::max(0.0, v.dot(G * v))));
  }
  return best;
}

}  // namespace hrs
