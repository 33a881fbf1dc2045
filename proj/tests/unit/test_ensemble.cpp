#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "hrs/ensemble.hpp"
#include "hrs/error.hpp"
#include "hrs/parallel.hpp"

using namespace hrs;

namespace {

GridSpec line_grid(double lo, double h, int cells, int axis = 1) {
  GridSpec g;
  g.origin = Vec::Constant(1, lo);
  g.spacing = Vec::Constant(1, h);
  g.shape = {cells};
  g.axes = {axis};
  return g;
}

EnsembleInit small_init(std::uint64_t seed) {
  EnsembleInit init;
  init.N = 401;
  init.d = 3;
  init.spread = 0.3;
  init.seed = seed;
  return init;
}

}  // namespace

TEST(Ensemble, ConstructionIsDeterministic) {
  const auto a = make_ensemble(small_init(11));
  const auto b = make_ensemble(small_init(11));
  ASSERT_EQ(a.states.size(), 401u);
  EXPECT_EQ(a.positions(), b.positions());
  const auto c = make_ensemble(small_init(12));
  EXPECT_NE(a.positions(), c.positions());
  EXPECT_EQ(a.positions().cols(), 3);
  EXPECT_EQ(a.states[0].u[3], 1.0);
}

TEST(Ensemble, RecenterPutsMedianExactly) {
  auto init = small_init(3);
  init.center = Vec::Constant(2, 0.7);
  init.recenter_median = true;
  const auto e = make_ensemble(init);
  const Vec med = spatial_median(e.positions());
  EXPECT_NEAR(med[0], 0.7, 1e-15);
  EXPECT_NEAR(med[1], 0.7, 1e-15);
}

TEST(Ensemble, UniformSpreadHasUnitVarianceShape) {
  auto init = small_init(5);
  init.N = 40000;
  init.distribution = InitialDistribution::uniform;
  const auto e = make_ensemble(init);
  // Two spatial axes, each with variance spread^2.
  EXPECT_NEAR(spatial_variance(e.positions()), 2 * 0.09, 0.006);
}

TEST(Ensemble, InvalidInitRejected) {
  auto init = small_init(1);
  init.d = 1;
  EXPECT_THROW(make_ensemble(init), DomainError);
  init = small_init(1);
  init.center = Vec::Zero(5);
  EXPECT_THROW(make_ensemble(init), ShapeError);
  EXPECT_THROW(parse_jitter_shape("gaussian"), DomainError);
}

TEST(SpatialStatistics, IgnoreTimeColumn) {
  Mat x(3, 3);
  x << 100.0, 1.0, 2.0, -50.0, 3.0, 2.0, 7.0, 5.0, 8.0;
  // Population variances: {1,3,5} -> 8/3, {2,2,8} -> 8.
  EXPECT_NEAR(spatial_variance(x), 8.0 / 3.0 + 8.0, 1e-14);
  const Vec med = spatial_median(x);
  EXPECT_EQ(med[0], 3.0);
  EXPECT_EQ(med[1], 2.0);
}

TEST(Cycle, ContractionMatchesIntegratedRate) {
  auto e = make_ensemble(small_init(7));
  CycleConfig cfg;
  cfg.jitter = 0.0;
  cfg.dt = 1e-3;
  const auto rec = run_cycle(e, cfg);
  // Var ratio exp(-2 lambda int_{1/4}^{1} (3s^2 - 2s^3) ds) with lambda = 5.
  const double integral = 0.5 - (std::pow(0.25, 3) - std::pow(0.25, 4) / 2.0);
  const double expected = std::exp(-10.0 * integral);
  EXPECT_NEAR(rec.variance_contractive_end / rec.variance_ergodic_end, expected, 1e-6);
  EXPECT_EQ(rec.variance_start, rec.variance_ergodic_end);
  EXPECT_EQ(rec.variance_expansive_end, rec.variance_contractive_end);
}

TEST(Cycle, DisabledContractionLeavesStaticEnsemble) {
  auto e = make_ensemble(small_init(8));
  const Mat before = e.positions();
  CycleConfig cfg;
  cfg.jitter = 0.0;
  cfg.contraction = false;
  const auto rec = run_cycle(e, cfg);
  EXPECT_EQ(e.positions(), before);
  EXPECT_FALSE(rec.contraction);
}

TEST(Cycle, SnapshotsCoverPhasesInOrder) {
  auto e = make_ensemble(small_init(9));
  e.T = 2.0;
  CycleConfig cfg;
  cfg.dt = 0.02;
  const auto rec = run_cycle(e, cfg, 3);
  EXPECT_EQ(rec.t_offset, 12.0);
  EXPECT_EQ(rec.snapshots.front().s, 0.0);
  EXPECT_EQ(rec.snapshots.back().s, 4.0);
  EXPECT_EQ(rec.snapshots.back().phase, CyclePhase::expansive);
  for (std::size_t i = 1; i < rec.snapshots.size(); ++i) {
    EXPECT_GT(rec.snapshots[i].s, rec.snapshots[i - 1].s);
    EXPECT_GE(static_cast<int>(rec.snapshots[i].phase),
              static_cast<int>(rec.snapshots[i - 1].phase));
  }
  EXPECT_EQ(rec.at(2.0).phase, CyclePhase::contractive);
  EXPECT_EQ(rec.metastable_residual, 0.0);
}

TEST(Cycle, JitterDoesNotDependOnThreadCount) {
  CycleConfig cfg;
  cfg.dt = 0.02;
  const unsigned saved = worker_threads();
  set_worker_threads(1);
  auto a = make_ensemble(small_init(10));
  run_cycle(a, cfg);
  set_worker_threads(4);
  auto b = make_ensemble(small_init(10));
  run_cycle(b, cfg);
  set_worker_threads(saved);
  EXPECT_EQ(a.positions(), b.positions());
}

TEST(Cycle, SpeedLimitCapsDisplacement) {
  auto e = make_ensemble(small_init(4));
  const Mat before = e.positions();
  CycleConfig cfg;
  cfg.jitter = 100.0;
  cfg.c_max = 0.5;
  cfg.contraction = false;
  cfg.dt = 0.01;
  run_cycle(e, cfg);
  const Mat after = e.positions();
  for (Eigen::Index k = 0; k < after.rows(); ++k) {
    EXPECT_LE((after.row(k) - before.row(k)).norm(), 0.5 * 2.0 + 1e-12);
  }
}

TEST(Grid, LocateAndCentres) {
  GridSpec g;
  g.origin = Vec::Zero(2);
  g.spacing = Vec::Constant(2, 0.5);
  g.shape = {4, 3};
  g.axes = {0, 1};
  EXPECT_EQ(g.cells(), 12u);
  EXPECT_EQ(g.cell_volume(), 0.25);
  Vec x(2);
  x << 1.2, 0.7;
  ASSERT_TRUE(g.locate(x).has_value());
  EXPECT_EQ(*g.locate(x), 2u * 3u + 1u);
  const Vec c = g.cell_center(7);
  EXPECT_EQ(c[0], 1.25);
  EXPECT_EQ(c[1], 0.75);
  x << 2.0, 0.0;
  EXPECT_FALSE(g.locate(x).has_value());
}

TEST(Density, CountsAndNormalization) {
  Mat pts(4, 2);
  pts << 0, 0.05, 0, 0.15, 0, 0.16, 0, 0.35;
  const auto f = density_field({pts}, line_grid(0.0, 0.1, 4));
  EXPECT_EQ(f.weights, (std::vector<double>{1.0, 2.0, 0.0, 1.0}));
  EXPECT_NEAR(f.values[1], 20.0, 1e-12);
  EXPECT_EQ(f.integral(), 4.0);
  const auto avg = density_field({pts, pts}, line_grid(0.0, 0.1, 4));
  EXPECT_EQ(avg.integral(), 4.0);
  EXPECT_EQ(avg.hits_per_weight, 2.0);
}

TEST(Density, AveragedSetsSumExactlyToN) {
  std::vector<Mat> sets;
  for (int k = 0; k < 3; ++k) {
    Mat pts(7, 2);
    for (int r = 0; r < 7; ++r) {
      pts(r, 0) = 0.0;
      pts(r, 1) = 0.013 * (r * (k + 2) % 29);
    }
    sets.push_back(pts);
  }
  const auto f = density_field(sets, line_grid(0.0, 0.05, 8));
  EXPECT_EQ(f.integral(), 7.0);
}

TEST(Density, EscapeIsReported) {
  Mat pts(2, 2);
  pts << 0, 0.05, 0, 7.0;
  EXPECT_THROW(density_field({pts}, line_grid(0.0, 0.1, 4)), CoverageError);
}

TEST(Density, WorldLineCountsEachCellOnce) {
  std::vector<std::vector<Vec>> lines(2);
  for (double y : {0.01, 0.02, 0.03, 0.25}) lines[0].push_back(Vec::Constant(2, y));
  lines[1].push_back(Vec::Constant(2, 0.31));
  const auto f = worldline_density(lines, line_grid(0.0, 0.1, 4));
  // Three visits in total normalized to two lines.
  EXPECT_NEAR(f.weights[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f.weights[2], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f.weights[3], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f.hits_per_weight, 1.5, 1e-15);
}

TEST(WaveFunction, BornRuleAndNorm) {
  Mat pts(5, 2);
  pts << 0, 0.05, 0, 0.15, 0, 0.16, 0, 0.35, 0, 0.36;
  const auto n2 = density_field({pts}, line_grid(0.0, 0.1, 4));
  const auto wf = assemble_wavefunction(n2, PhaseModel::plane_wave(Vec::Constant(1, 3.0),
                                                                   Vec::Zero(1)));
  EXPECT_NEAR(wf.norm(), 1.0, 1e-14);
  EXPECT_NEAR(wf.phase[2], 3.0 * 0.25, 1e-15);
  const auto check = born_check(n2, wf, 5.0);
  EXPECT_LT(check.norm_error, 1e-14);
  EXPECT_LT(check.max_cell_error, 1e-12);
  EXPECT_EQ(check.integral_error, 0.0);
  EXPECT_NEAR(std::abs(inner_product(wf, wf)), 1.0, 1e-14);
}

TEST(WaveFunction, CorruptDensityRejected) {
  DensityField f;
  f.grid = line_grid(0.0, 1.0, 2);
  f.values = {1.0, std::nan("")};
  f.weights = {1.0, 1.0};
  EXPECT_THROW(assemble_wavefunction(f, PhaseModel::constant()), DataCorruptionError);
  f.values = {0.0, 0.0};
  f.weights = {0.0, 0.0};
  EXPECT_THROW(assemble_wavefunction(f, PhaseModel::constant()), DataCorruptionError);
}

TEST(WaveFunction, SuperpositionInterferes) {
  Mat pts(2, 2);
  pts << 0, 0.05, 0, 0.15;
  const auto n2 = density_field({pts}, line_grid(0.0, 0.1, 2));
  const auto a = assemble_wavefunction(n2, PhaseModel::constant(0.0));
  const auto b = assemble_wavefunction(n2, PhaseModel::cell_field({0.0, std::numbers::pi}));
  const auto s = superpose(a, b);
  EXPECT_NEAR(s.norm(), 1.0, 1e-14);
  // Constructive in cell 0, destructive in cell 1.
  EXPECT_NEAR(std::norm(s.psi[0]) * 0.1, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.psi[1]), 0.0, 1e-12);
  const auto opposite = assemble_wavefunction(n2, PhaseModel::constant(std::numbers::pi));
  EXPECT_THROW(superpose(a, opposite), DomainError);
}

TEST(WaveFunction, InnerProductOfDisjointSupportsIsZero) {
  Mat left(2, 2), right(2, 2);
  left << 0, 0.05, 0, 0.15;
  right << 0, 0.25, 0, 0.35;
  const auto grid = line_grid(0.0, 0.1, 4);
  const auto a = assemble_wavefunction(density_field({left}, grid), PhaseModel::constant(0.3));
  const auto b = assemble_wavefunction(density_field({right}, grid), PhaseModel::constant(1.1));
  EXPECT_EQ(inner_product(a, b), std::complex<double>(0.0, 0.0));
}

TEST(WaveFunction, InnerProductIsHermitian) {
  Mat pts(3, 2);
  pts << 0, 0.05, 0, 0.15, 0, 0.16;
  const auto n2 = density_field({pts}, line_grid(0.0, 0.1, 2));
  const auto a = assemble_wavefunction(n2, PhaseModel::cell_field({0.4, -1.2}));
  const auto b = assemble_wavefunction(n2, PhaseModel::cell_field({2.0, 0.7}));
  const auto ab = inner_product(a, b);
  const auto ba = inner_product(b, a);
  EXPECT_NEAR(ab.real(), ba.real(), 1e-15);
  EXPECT_NEAR(ab.imag(), -ba.imag(), 1e-15);
}

TEST(WaveFunction, OscillatingPhaseDecorrelatesFlatDensity) {
  constexpr int cells = 200;
  Mat pts(cells, 2);
  for (int i = 0; i < cells; ++i) {
    pts(i, 0) = 0.0;
    pts(i, 1) = (i + 0.5) / cells;
  }
  const auto grid = line_grid(0.0, 1.0 / cells, cells);
  const auto n2 = density_field({pts}, grid);
  const auto flat = assemble_wavefunction(n2, PhaseModel::constant());
  double previous = 1.0;
  for (double k : {1.0, 10.0, 100.0}) {
    const auto wave = assemble_wavefunction(n2, PhaseModel::plane_wave(Vec::Constant(1, k),
                                                                       Vec::Zero(1)));
    const double overlap = std::abs(inner_product(flat, wave));
    // Midpoint sum of exp(ikx) over [0, 1].
    const double h = 1.0 / cells;
    const double expected = std::abs(std::sin(k / 2.0) / (cells * std::sin(k * h / 2.0)));
    EXPECT_NEAR(overlap, expected, 1e-12) << k;
    EXPECT_LT(overlap, previous) << k;
    previous = overlap;
  }
  EXPECT_LT(previous, 0.01);
}

TEST(WaveFunction, RandomPhasesAverageOnCircle) {
  Mat pts(3, 2);
  pts << 0, 0.05, 0, 0.06, 0, 0.15;
  const auto pm = random_cell_phases(pts, {0.2, 0.6, -1.0}, line_grid(0.0, 0.1, 3));
  EXPECT_NEAR(pm.at(line_grid(0.0, 0.1, 3), 0), 0.4, 1e-15);
  EXPECT_NEAR(pm.at(line_grid(0.0, 0.1, 3), 1), -1.0, 1e-15);
  EXPECT_EQ(pm.at(line_grid(0.0, 0.1, 3), 2), 0.0);
}

TEST(Correlation, Bounds) {
  EXPECT_EQ(correlation_bound(2.0), 4.0);
  EXPECT_TRUE(std::isinf(correlation_bound_mass(0.0, 1.0)));
  EXPECT_EQ(correlation_bound_mass(2.0, 1.0), 1.0);
  // hbar / (m_e c^2) in seconds.
  EXPECT_NEAR(semi_period(9.1093837015e-31, 1.0, Units::si()) / 1.2880886681975522e-21, 1.0,
              1e-8);
  EXPECT_THROW(semi_period(0.0, 1.0), DomainError);
}
