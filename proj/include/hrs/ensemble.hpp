#pragma once

#include <complex>
#include <functional>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "hrs/flow.hpp"
#include "hrs/geometry.hpp"
#include "hrs/io.hpp"

namespace hrs {

// Sub-quantum molecules of one system. Each state has 2d configuration
// components (x then y) and 2d momenta; x[0] is the time coordinate and the
// remaining d-1 components are spatial.
struct MoleculeEnsemble {
  int N = 1;
  int d = 2;
  std::vector<PhasePoint> states;
  double m = 1.0;
  double M_sys = 1.0;
  double T = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  // N x d matrix of position components.
  Mat positions() const;
};

enum class InitialDistribution { gaussian, uniform };
enum class JitterShape { uniform, triangular };

InitialDistribution parse_initial_distribution(std::string_view name);
JitterShape parse_jitter_shape(std::string_view name);
std::string_view to_string(JitterShape shape);

struct EnsembleInit {
  int N = 1000;
  int d = 3;
  Vec center;  // spatial centre, length d-1; zero if empty
  double spread = 0.2;
  InitialDistribution distribution = InitialDistribution::gaussian;
  // Shift the sample so its coordinate-wise median equals `center` exactly.
  bool recenter_median = false;
  double m = 1.0;
  double M_sys = 1.0;
  double T = 1.0;
  std::uint64_t seed = 0;
};

MoleculeEnsemble make_ensemble(const EnsembleInit& init);

struct CycleConfig {
  KappaProfile profile = KappaProfile::smoothstep;
  double lambda_c = 0.0;  // contraction rate; <= 0 selects 5/T
  double ergodic_fraction = 0.25;
  bool contraction = true;

  double dt = 0.01;
  double drift_factor = 2.0;
  double c_max = 1.0;
  std::optional<DriftField> beta;  // per-molecule field of length 2d

  // Jitter is a random velocity with unit-variance shape times `jitter`.
  double jitter = 0.5;
  JitterShape shape = JitterShape::uniform;

  int snapshot_stride = 10;
};

enum class CyclePhase { ergodic, contractive, expansive };
std::string_view to_string(CyclePhase phase);

struct Snapshot {
  double s = 0.0;  // local internal time in [0, 2T]
  double t = 0.0;  // global internal time
  CyclePhase phase = CyclePhase::ergodic;
  Mat x;           // N x d positions
  double variance = 0.0;
};

struct CycleRecord {
  int cycle = 0;
  double T = 1.0;
  double t_offset = 0.0;
  double ergodic_end = 0.0;
  double contractive_end = 0.0;
  double expansive_end = 0.0;
  bool contraction = true;
  std::vector<Snapshot> snapshots;

  double variance_start = 0.0;
  double variance_ergodic_end = 0.0;
  double variance_contractive_end = 0.0;
  double variance_expansive_end = 0.0;
  // max |H_t| over the molecules at t = (2n+1)T.
  double metastable_residual = 0.0;

  // Snapshot whose local time is closest to s.
  const Snapshot& at(double s) const;
};

// Trace of the spatial covariance of an N x d position matrix.
double spatial_variance(const Mat& x);
Vec spatial_median(const Mat& x);

// One fundamental cycle on local time [0, 2T]; advances e.states in place.
CycleRecord run_cycle(MoleculeEnsemble& e, const CycleConfig& cfg, int cycle = 0);

struct GridSpec {
  Vec origin;               // lower corner
  Vec spacing;
  std::vector<int> shape;
  std::vector<int> axes;    // position components histogrammed

  int rank() const { return static_cast<int>(shape.size()); }
  std::size_t cells() const;
  double cell_volume() const;
  std::optional<std::size_t> locate(const Vec& x) const;
  Vec cell_center(std::size_t index) const;
  bool operator==(const GridSpec& other) const;
  void validate() const;
};

struct DensityField {
  GridSpec grid;
  std::vector<double> values;   // molecules per unit volume
  std::vector<double> weights;  // molecules per cell
  double hits_per_weight = 1.0;  // raw cell visits per unit weight
  double integral() const;      // sum of weights
};

// Histogram of point sets (rows are positions). With several sets the field
// is averaged so that it still integrates to N.
DensityField density_field(const std::vector<Mat>& point_sets, const GridSpec& grid);
DensityField density_field(const std::vector<CycleRecord>& records, const GridSpec& grid,
                           double s_slice);
// Fills the sample points of world line `index`.
using WorldLineGenerator = std::function<void(std::size_t index, std::vector<Vec>& points)>;
// Each world line counts once in every cell it visits; normalized to the
// number of lines.
DensityField worldline_density(std::size_t count, const WorldLineGenerator& line,
                               const GridSpec& grid);
DensityField worldline_density(const std::vector<std::vector<Vec>>& lines, const GridSpec& grid);

struct PhaseModel {
  enum class Kind { constant, plane_wave, cell_field };
  Kind kind = Kind::constant;
  double theta0 = 0.0;
  Vec k;
  Vec origin;
  std::vector<double> cell_phase;

  static PhaseModel constant(double theta0 = 0.0);
  static PhaseModel plane_wave(Vec k, Vec origin);
  static PhaseModel cell_field(std::vector<double> phases);
  double at(const GridSpec& grid, std::size_t cell) const;
};

// Per-molecule phases averaged on the unit circle within each cell.
PhaseModel random_cell_phases(const Mat& points, const std::vector<double>& phases,
                              const GridSpec& grid);

struct EmergentWaveFunction {
  GridSpec grid;
  std::vector<std::complex<double>> psi;
  std::vector<double> phase;
  double N = 0.0;
  double norm() const;  // sum |psi|^2 dV
};

EmergentWaveFunction assemble_wavefunction(const DensityField& n2, const PhaseModel& phase);
std::complex<double> inner_product(const EmergentWaveFunction& a, const EmergentWaveFunction& b);
// C (a + b) with C fixing unit norm.
EmergentWaveFunction superpose(const EmergentWaveFunction& a, const EmergentWaveFunction& b);

struct BornCheck {
  double norm_error = 0.0;        // | ||psi||^2 - 1 |
  double max_cell_error = 0.0;    // max |N |psi|^2 - n2| / max(1, n2)
  double integral_error = 0.0;    // | sum weights - N |
};
BornCheck born_check(const DensityField& n2, const EmergentWaveFunction& psi, double N);

struct Units {
  double hbar = 1.0;
  double c = 1.0;
  static Units natural() { return {1.0, 1.0}; }
  static Units si();
};

double semi_period(double M_sys, double alpha_et, const Units& units = Units::natural());
double correlation_bound(double T, double c = 1.0);
// +infinity for M_sys = 0.
double correlation_bound_mass(double M_sys, double alpha_et, const Units& units = Units::natural());

io::Table density_table(const DensityField& field);
io::Table wavefunction_table(const EmergentWaveFunction& wf);

}  // namespace hrs
