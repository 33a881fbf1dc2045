#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hrs/concentration.hpp"
#include "hrs/config.hpp"
#include "hrs/ensemble.hpp"
#include "hrs/io.hpp"
#include "hrs/lipschitz.hpp"

namespace hrs {

inline constexpr const char* kVersion = "hrsim 1.0.0";

// ---- collapse cycles -------------------------------------------------------

struct CollapseResult {
  std::vector<CycleRecord> records;
  std::vector<CollapseMetrics> metrics;
  int collapse_events = 0;
};

CollapseResult run_collapse(const RunConfig& cfg);

// ---- double slit -----------------------------------------------------------

enum class SlitPhase { plane_wave, constant, random };

struct DoubleSlitParams {
  double separation = 2.0;   // distance between slit centres
  double slit_width = 0.2;
  double wavelength = 0.25;
  double fan = 0.4;          // half-angle of the emission fan (rad)
  double length = 20.0;      // slit plane to far grid edge
  double half_height = 10.0;
  double spacing = 0.2;
  int per_slit = 20000;
  std::string closed = "none";  // "none", "a" or "b"
  SlitPhase phase = SlitPhase::plane_wave;
  double T = 1.0;
  std::uint64_t seed = 0;
};

struct DoubleSlitResult {
  GridSpec grid;
  EmergentWaveFunction psi_a;
  EmergentWaveFunction psi_b;
  EmergentWaveFunction psi;  // C (psi_a + psi_b)
  BornCheck born_a;
  BornCheck born_b;
  std::vector<double> screen_y;
  std::vector<double> amp_a;      // |psi_a| on the far grid line
  std::vector<double> amp_b;
  std::vector<double> prob_superposed;  // unit integral along the line
  std::vector<double> prob_two_time;
  double fringe_expected = 0.0;
  double fringe_measured = 0.0;
  double visibility = 0.0;
  double midline_ratio = 0.0;     // |psi_a| / |psi_b| at the central cells
  double midline_tolerance = 0.0;
  double l1_gap = 0.0;
};

DoubleSlitParams double_slit_params(const RunConfig& cfg);
DoubleSlitResult run_double_slit(const DoubleSlitParams& params);

// Strongest period of a real signal between lo and hi (DFT scan).
double dominant_period(const std::vector<double>& y, const std::vector<double>& signal, double lo,
                       double hi, int steps = 4000);

// ---- weak equivalence --------------------------------------------------------

struct WepSystem {
  JitterShape shape = JitterShape::uniform;
  InitialDistribution distribution = InitialDistribution::gaussian;
  double m = 1.0;
  std::uint64_t seed = 0;
};

struct WepParams {
  int N = 500;
  int d = 3;
  int steps = 10;           // tau-steps (cycles)
  double grid_unit = 0.2;
  double spread = 0.2;
  double T = 1.0;
  CycleConfig cycle;
  WepSystem a;
  WepSystem b;
  int scaling_seeds = 0;
};

struct WepReport {
  std::vector<double> tau;
  std::vector<Vec> median_a;
  std::vector<Vec> median_b;
  std::vector<double> deviation;  // grid units, per tau-step
  double max_deviation = 0.0;
  double envelope = 0.0;          // 5 / sqrt(N)
  bool within_envelope = false;
  double log10_paper_bound = 0.0;  // log10 of (1/2) exp(-32 N^2)
  double mean_max_deviation_N = 0.0;
  double mean_max_deviation_2N = 0.0;
  double scaling_ratio = 0.0;      // mean(N) / mean(2N); 0 when not run
  int scaling_seeds = 0;

  io::Table to_table() const;
  nlohmann::ordered_json to_json() const;
};

WepParams wep_params(const RunConfig& cfg);
WepReport run_wep(const WepParams& params);

// ---- concentration suite -----------------------------------------------------

struct ConcentrationSuiteParams {
  int sphere_dim = 100;  // ambient dimension of S^(n-1)
  std::size_t sphere_samples = 100000;
  std::vector<double> epsilons = {0.1, 0.2, 0.3};
  int gaussian_dim = 1000;
  std::size_t gaussian_samples = 100000;
  double rho_P = 1.0;
  std::vector<double> rhos = {1.0};  // multiples of rho_P
  std::uint64_t seed = 0;
};

struct ConcentrationSuiteResult {
  ConcentrationReport sphere;
  ConcentrationReport gaussian;
  std::vector<double> gaussian_one_sided;
  std::vector<double> sphere_alt_bound;
};

ConcentrationSuiteParams concentration_params(const RunConfig& cfg);
ConcentrationSuiteResult run_concentration_suite(const ConcentrationSuiteParams& params);

// ---- decomposition -----------------------------------------------------------

struct DecomposeParams {
  int d = 2;
  int molecules = 1;
  DriftField beta = DriftField::constant(Vec::Zero(4));  // per molecule
  double half_width = 1.0;
  std::size_t probes = 10000;
  std::uint64_t seed = 0;
};

struct DecomposeResult {
  LipschitzCertificate raw;          // H on K
  LipschitzCertificate normalized;   // H / M on K
  LipschitzCertificate lipschitz_part;  // on 2K
  std::string profile;
  double reconstruction_residual = 0.0;
  double matter_inside_max = 0.0;
  double matter_outside_max = 0.0;
};

DecomposeParams decompose_params(const RunConfig& cfg);
DecomposeResult run_decompose(const DecomposeParams& params);
io::Table alpha_sweep_table();

// ---- scenario runner ---------------------------------------------------------

struct RunOptions {
  std::filesystem::path out;
  io::TableFormat format = io::TableFormat::csv;
};

struct Manifest {
  std::vector<std::filesystem::path> outputs;
  nlohmann::ordered_json doc;
};

// Runs cfg.scenario, writes its artifacts and manifest.json under out.
Manifest run_scenario(const RunConfig& cfg, const RunOptions& options);

}  // namespace hrs
