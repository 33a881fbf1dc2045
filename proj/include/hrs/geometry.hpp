#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hrs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Spacetime metric of signature (+, -, ..., -). Only constant components are
// supported; the lift below assumes the flat connection.
class LorentzMetric {
 public:
  static LorentzMetric minkowski(int dim = 4);
  // Throws SignatureError unless `components` is symmetric with exactly one
  // positive and dim-1 negative eigenvalues.
  static LorentzMetric constant(const Mat& components);

  int dim() const { return static_cast<int>(g_.rows()); }
  const Mat& components() const { return g_; }
  const Mat& components(const Vec& /*x*/) const { return g_; }
  double operator()(const Vec& a, const Vec& b) const { return a.dot(g_ * b); }

 private:
  explicit LorentzMetric(Mat g) : g_(std::move(g)) {}
  Mat g_;
};

void check_lorentz_signature(const Mat& g);

// Dual block diag(g4^-1, g4^-1) acting on (p_x, p_y) of one molecule.
Mat sasaki_block_metric(const LorentzMetric& g4);

// Configuration-space vector field u -> beta(u) in R^n.
class DriftField {
 public:
  enum class Family { constant, linear, sinusoidal, custom };

  static DriftField constant(Vec b);
  // beta(u) = A u + b
  static DriftField linear(Mat A, Vec b);
  // beta_i(u) = b_i + a_i sin((W u)_i + phi_i)
  static DriftField sinusoidal(Vec b, Vec a, Mat W, Vec phi);
  // Opaque callback; has no Jacobian, so Hamilton equations reject it.
  static DriftField custom(int n, std::function<Vec(const Vec&)> fn);

  Family family() const { return family_; }
  std::string family_name() const;
  int size() const { return n_; }
  bool has_jacobian() const { return family_ != Family::custom; }

  Vec operator()(const Vec& u) const;
  // d beta^k / d u^i stored as J(k, i).
  Mat jacobian(const Vec& u) const;
  // Same field on each of N molecule blocks (block-diagonal coupling).
  DriftField tiled(int N) const;

 private:
  Family family_ = Family::constant;
  int n_ = 0;
  Vec b_, a_, phi_;
  Mat A_;
  std::function<Vec(const Vec&)> fn_;
};

struct PhasePoint {
  Vec u;
  Vec p;

  PhasePoint() = default;
  PhasePoint(Vec u_, Vec p_) : u(std::move(u_)), p(std::move(p_)) {}
};

struct Box {
  Vec lo;
  Vec hi;

  static Box cube(int n, double half_width);
  int size() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& v) const;
  Vec clamp(const Vec& v) const;
  Box scaled(double factor) const;  // about the centre
};

// F(u, p) = sqrt(eta^{ij} p_i p_j) + beta^i(u) p_i over a 2dN-dimensional
// phase fibre. Molecule k owns indices [2dk, 2dk + 2d): d position
// components followed by d velocity components; momenta use the same layout.
class RandersStructure {
 public:
  // Assembles eta from N Sasaki blocks of g4.
  RandersStructure(const LorentzMetric& g4, int N, DriftField beta);
  // Arbitrary constant symmetric dual metric of size 2dN.
  RandersStructure(int N, int d, Mat eta, DriftField beta);

  int molecules() const { return N_; }
  int spacetime_dim() const { return d_; }
  int size() const { return static_cast<int>(eta_.rows()); }
  const Mat& eta() const { return eta_; }
  const Mat& eta_lower() const { return eta_lower_; }
  const DriftField& beta() const { return beta_; }
  bool kappa_independent_of_p = true;

  // Max of eta_lower(beta, beta) over `samples` uniform points in `region`;
  // throws RandersBoundError if it reaches 1.
  double check_randers_bound(const Box& region, int samples = 10000,
                             std::uint64_t seed = 0x5eed) const;

  bool is_position_index(int i) const { return (i % (2 * d_)) < d_; }

 private:
  int N_;
  int d_;
  Mat eta_;
  Mat eta_lower_;
  DriftField beta_;
};

void check_phase_point(const RandersStructure& s, const PhasePoint& pt);

double alpha_squared(const RandersStructure& s, const PhasePoint& pt);
bool cone_contains(const RandersStructure& s, const PhasePoint& pt);
double hr_value(const RandersStructure& s, const PhasePoint& pt);
// p-gradient of F^2 / 2.
Vec half_f2_gradient(const RandersStructure& s, const PhasePoint& pt);
Mat fundamental_tensor(const RandersStructure& s, const PhasePoint& pt);

// Draws momenta on the unit hyperboloid eta(p, p) = 1. A point is
// cosh(r) w + sinh(r) b/r in the eigenbasis of eta, with w uniform on the
// unit sphere of the positive subspace and boost b ~ N(0, sigma_b^2) in the
// negative subspace.
struct HyperboloidSampler {
  int count = 100000;
  double sigma_b = 1.0;
  std::uint64_t seed = 1;

  struct Sample {
    Vec p;
    double weight;
  };
  struct Basis {
    Mat Q;
    Vec lambda;
    std::vector<int> positive, negative;
  };
  // Eigendecomposition of eta; throws SamplingError if degenerate or if
  // there is no positive direction.
  static Basis prepare(const Mat& eta);
  Sample draw(const Basis& basis, std::uint64_t index) const;
  Sample draw(const Mat& eta, std::uint64_t index) const { return draw(prepare(eta), index); }
  // Optional transformation applied to every sample (e.g. a reflection).
  std::function<Vec(const Vec&)> transform;
};

Mat averaged_metric(const RandersStructure& s, const Vec& u, const HyperboloidSampler& sampler);

struct ObserverFrame {
  Vec W;
};

// The formula as printed: eta(u,v) - 2 eta(u,W) eta(v,W) / eta(W,W).
Mat observer_metric_raw(const LorentzMetric& g4, const ObserverFrame& frame);
// Positive-definite convention: the negation of the raw form. Throws
// FrameError for non-timelike W.
Mat observer_metric(const LorentzMetric& g4, const ObserverFrame& frame);
inline constexpr const char* kObserverMetricConvention = "negated";

double distance_to_worldline(const Vec& x, const std::vector<Vec>& line, const LorentzMetric& g4,
                             const ObserverFrame& frame);

}  // namespace hrs
