#include "hrs/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "hrs/constants.hpp"
#include "hrs/error.hpp"
#include "hrs/parallel.hpp"
#include "hrs/rng.hpp"
#include "hrs/stats.hpp"

namespace hrs {

void MoleculeEnsemble::validate() const {
  if (N < 1) throw DomainError("MoleculeEnsemble: N must be >= 1");
  if (d < 2) throw DomainError("MoleculeEnsemble: d must be >= 2");
  if (!(T > 0.0)) throw DomainError("MoleculeEnsemble: T must be positive");
  if (!(m > 0.0) || M_sys < m) throw DomainError("MoleculeEnsemble: need 0 < m <= M_sys");
  if (states.size() != static_cast<std::size_t>(N)) {
    throw ShapeError("MoleculeEnsemble: expected " + std::to_string(N) + " states");
  }
  for (const auto& st : states) {
    if (st.u.size() != 2 * d || st.p.size() != 2 * d) {
      throw ShapeError("MoleculeEnsemble: state blocks must have length 2d");
    }
  }
}

Mat MoleculeEnsemble::positions() const {
  Mat x(N, d);
  for (int k = 0; k < N; ++k) x.row(k) = states[static_cast<std::size_t>(k)].u.head(d).transpose();
  return x;
}

InitialDistribution parse_initial_distribution(std::string_view name) {
  if (name == "gaussian") return InitialDistribution::gaussian;
  if (name == "uniform") return InitialDistribution::uniform;
  throw DomainError("unknown initial distribution '" + std::string(name) +
                    "' (expected gaussian|uniform)");
}

JitterShape parse_jitter_shape(std::string_view name) {
  if (name == "uniform") return JitterShape::uniform;
  if (name == "triangular") return JitterShape::triangular;
  throw DomainError("unknown jitter shape '" + std::string(name) +
                    "' (expected uniform|triangular)");
}

std::string_view to_string(JitterShape shape) {
  return shape == JitterShape::uniform ? "uniform" : "triangular";
}

std::string_view to_string(CyclePhase phase) {
  switch (phase) {
    case CyclePhase::ergodic: return "ergodic";
    case CyclePhase::contractive: return "contractive";
    case CyclePhase::expansive: return "expansive";
  }
  return "unknown";
}

double spatial_variance(const Mat& x) {
  if (x.rows() == 0 || x.cols() < 2) return 0.0;
  const Mat sp = x.rightCols(x.cols() - 1);
  const Eigen::RowVectorXd mean = sp.colwise().mean();
  return (sp.rowwise() - mean).squaredNorm() / static_cast<double>(x.rows());
}

Vec spatial_median(const Mat& x) {
  Vec med(x.cols() - 1);
  std::vector<double> col(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    for (Eigen::Index k = 0; k < x.rows(); ++k) col[static_cast<std::size_t>(k)] = x(k, j);
    med[j - 1] = stats::median(col);
  }
  return med;
}

MoleculeEnsemble make_ensemble(const EnsembleInit& init) {
  if (init.N < 1 || init.d < 2) throw DomainError("make_ensemble: need N >= 1 and d >= 2");
  if (!(init.spread >= 0.0)) throw DomainError("make_ensemble: spread must be >= 0");
  const int d = init.d;
  Vec center = init.center.size() ? init.center : Vec::Zero(d - 1);
  if (center.size() != d - 1) throw ShapeError("make_ensemble: centre must have d-1 components");

  MoleculeEnsemble e;
  e.N = init.N;
  e.d = d;
  e.m = init.m;
  e.M_sys = init.M_sys;
  e.T = init.T;
  e.rng_seed = init.seed;
  e.states.resize(static_cast<std::size_t>(init.N));
  parallel_for(static_cast<std::size_t>(init.N), [&](std::size_t k) {
    StreamRng rng(init.seed, stream_id(0x1417, k));
    PhasePoint st(Vec::Zero(2 * d), Vec::Zero(2 * d));
    for (int j = 1; j < d; ++j) {
      const double xi = init.distribution == InitialDistribution::gaussian
                            ? rng.normal()
                            : std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
      st.u[j] = center[j - 1] + init.spread * xi;
    }
    st.u[d] = 1.0;  // unit velocity along the time axis
    st.p[0] = 1.0;  // timelike momentum
    e.states[k] = std::move(st);
  });
  if (init.recenter_median) {
    const Vec shift = center - spatial_median(e.positions());
    for (auto& st : e.states) st.u.segment(1, d - 1) += shift;
  }
  e.validate();
  return e;
}

const Snapshot& CycleRecord::at(double s) const {
  if (snapshots.empty()) throw DomainError("CycleRecord: no snapshots");
  const Snapshot* best = &snapshots.front();
  for (const auto& snap : snapshots) {
    if (std::abs(snap.s - s) < std::abs(best->s - s)) best = &snap;
  }
  return *best;
}

namespace {

double jitter_draw(StreamRng& rng, JitterShape shape) {
  if (shape == JitterShape::uniform) return std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
  return std::sqrt(6.0) * (rng.uniform() + rng.uniform() - 1.0);
}

}  // namespace

CycleRecord run_cycle(MoleculeEnsemble& e, const CycleConfig& cfg, int cycle) {
  e.validate();
  const int d = e.d;
  const double T = e.T;
  const KappaSchedule sched(T, cfg.profile);
  const double lambda = cfg.lambda_c > 0.0 ? cfg.lambda_c : 5.0 / T;
  if (!(cfg.ergodic_fraction > 0.0 && cfg.ergodic_fraction < 1.0)) {
    throw DomainError("run_cycle: ergodic_fraction must lie in (0, 1)");
  }
  if (!(cfg.dt > 0.0)) throw DomainError("run_cycle: dt must be positive");
  if (!(cfg.c_max > 0.0)) throw DomainError("run_cycle: c_max must be positive");
  if (!(cfg.jitter >= 0.0)) throw DomainError("run_cycle: jitter must be >= 0");
  if (cfg.snapshot_stride < 1) throw DomainError("run_cycle: snapshot_stride must be >= 1");
  if (cfg.beta && cfg.beta->size() != 2 * d) {
    throw ShapeError("run_cycle: drift field must have length 2d");
  }

  CycleRecord rec;
  rec.cycle = cycle;
  rec.T = T;
  rec.t_offset = 2.0 * T * cycle;
  rec.ergodic_end = cfg.ergodic_fraction * T;
  rec.contractive_end = T;
  rec.expansive_end = 2.0 * T;
  rec.contraction = cfg.contraction;

  std::vector<StreamRng> rngs;
  rngs.reserve(static_cast<std::size_t>(e.N));
  for (int k = 0; k < e.N; ++k) {
    rngs.emplace_back(e.rng_seed, stream_id(0xC1C1E, static_cast<std::uint64_t>(cycle),
                                            static_cast<std::uint64_t>(k)));
  }

  auto take_snapshot = [&](double s, CyclePhase phase) {
    Snapshot snap;
    snap.s = s;
    snap.t = rec.t_offset + s;
    snap.phase = phase;
    snap.x = e.positions();
    snap.variance = spatial_variance(snap.x);
    rec.snapshots.push_back(std::move(snap));
    return rec.snapshots.back().variance;
  };
  auto kappa_cycle = [&](double s) {
    return s <= T ? sched(std::min(s, T)) : sched(std::max(0.0, 2.0 * T - s));
  };

  rec.variance_start = take_snapshot(0.0, CyclePhase::ergodic);

  struct Span {
    CyclePhase phase;
    double a, b;
  };
  const Span spans[] = {{CyclePhase::ergodic, 0.0, rec.ergodic_end},
                        {CyclePhase::contractive, rec.ergodic_end, T},
                        {CyclePhase::expansive, T, 2.0 * T}};
  const std::size_t N = static_cast<std::size_t>(e.N);
  long step_counter = 0;
  for (const auto& span : spans) {
    const auto n = std::max<long>(1, static_cast<long>(std::ceil((span.b - span.a) / cfg.dt - 1e-9)));
    const double h = (span.b - span.a) / static_cast<double>(n);
    const bool jitter_on = span.phase != CyclePhase::contractive && cfg.jitter > 0.0;
    const bool contract = span.phase == CyclePhase::contractive && cfg.contraction;
    for (long i = 0; i < n; ++i) {
      const double s0 = span.a + h * static_cast<double>(i);
      const double s1 = i == n - 1 ? span.b : s0 + h;
      const double smid = 0.5 * (s0 + s1);
      const double drift_scale = cfg.drift_factor * (1.0 - kappa_cycle(smid)) * h;
      parallel_for(N, [&](std::size_t k) {
        Vec& u = e.states[k].u;
        Vec du = cfg.beta ? Vec(drift_scale * (*cfg.beta)(u)) : Vec::Zero(2 * d);
        if (jitter_on) {
          for (int j = 1; j < d; ++j) du[j] += cfg.jitter * h * jitter_draw(rngs[k], cfg.shape);
        }
        const double disp = du.segment(1, d - 1).norm();
        const double limit = cfg.c_max * h;
        if (disp > limit) du.segment(1, d - 1) *= limit / disp;
        u += du;
      });
      if (contract) {
        const Vec med = spatial_median(e.positions());
        const double factor = std::exp(-lambda * sched(std::min(smid, T)) * h);
        parallel_for(N, [&](std::size_t k) {
          Vec& u = e.states[k].u;
          for (int j = 1; j < d; ++j) u[j] = med[j - 1] + (u[j] - med[j - 1]) * factor;
        });
      }
      ++step_counter;
      if (i == n - 1 || step_counter % cfg.snapshot_stride == 0) {
        const double v = take_snapshot(s1, span.phase);
        if (i == n - 1) {
          if (span.phase == CyclePhase::ergodic) rec.variance_ergodic_end = v;
          if (span.phase == CyclePhase::contractive) rec.variance_contractive_end = v;
          if (span.phase == CyclePhase::expansive) rec.variance_expansive_end = v;
        }
      }
    }
    if (span.phase == CyclePhase::contractive) {
      const RandersStructure mol(LorentzMetric::minkowski(d), 1,
                                 cfg.beta ? *cfg.beta : DriftField::constant(Vec::Zero(2 * d)));
      rec.metastable_residual = metastable_residual(mol, mol.eta(), sched, e.states, T);
    }
  }
  return rec;
}

void GridSpec::validate() const {
  const auto r = shape.size();
  if (r == 0) throw ShapeError("GridSpec: empty shape");
  if (static_cast<std::size_t>(origin.size()) != r || static_cast<std::size_t>(spacing.size()) != r ||
      axes.size() != r) {
    throw ShapeError("GridSpec: origin, spacing, shape and axes must have equal length");
  }
  for (std::size_t a = 0; a < r; ++a) {
    if (shape[a] < 1) throw ShapeError("GridSpec: shape entries must be >= 1");
    if (!(spacing[static_cast<Eigen::Index>(a)] > 0.0)) {
      throw ShapeError("GridSpec: spacing must be positive");
    }
    if (axes[a] < 0) throw ShapeError("GridSpec: axes must be nonnegative");
  }
}

std::size_t GridSpec::cells() const {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(s);
  return n;
}

double GridSpec::cell_volume() const { return spacing.prod(); }

std::optional<std::size_t> GridSpec::locate(const Vec& x) const {
  std::size_t index = 0;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    if (axes[a] >= x.size()) throw ShapeError("GridSpec: axis beyond point dimension");
    const double f = std::floor((x[axes[a]] - origin[ai]) / spacing[ai]);
    if (!(f >= 0.0) || f >= shape[a]) return std::nullopt;
    index = index * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(f);
  }
  return index;
}

Vec GridSpec::cell_center(std::size_t index) const {
  Vec c(rank());
  for (int a = rank() - 1; a >= 0; --a) {
    const auto s = static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);
    c[a] = origin[a] + (static_cast<double>(index % s) + 0.5) * spacing[a];
    index /= s;
  }
  return c;
}

bool GridSpec::operator==(const GridSpec& o) const {
  return shape == o.shape && axes == o.axes && origin == o.origin && spacing == o.spacing;
}

double DensityField::integral() const {
  double total = 0.0;
  for (double w : weights) total += w;
  return total;
}

namespace {

[[noreturn]] void report_escapees(const std::vector<std::size_t>& idx, std::size_t total,
                                  const char* what) {
  std::string msg = std::string("grid does not cover ") + std::to_string(total) + " " + what + ":";
  for (std::size_t i = 0; i < idx.size() && i < 10; ++i) msg += " " + std::to_string(idx[i]);
  if (idx.size() > 10) msg += " ...";
  throw CoverageError(msg);
}

DensityField finish_density(const GridSpec& grid, std::vector<double> counts, double N,
                            double total_counts) {
  DensityField f;
  f.grid = grid;
  const double scale = total_counts == N ? 1.0 : N / total_counts;
  const double vol = grid.cell_volume();
  f.weights = std::move(counts);
  f.hits_per_weight = 1.0 / scale;
  if (scale != 1.0) {
    for (double& w : f.weights) w *= scale;
    // Fold the rounding residue into the heaviest cell so the sequential
    // sum of weights equals N.
    const auto heaviest = std::max_element(f.weights.begin(), f.weights.end());
    for (int pass = 0; pass < 4 && heaviest != f.weights.end(); ++pass) {
      double sum = 0.0;
      for (double w : f.weights) sum += w;
      if (sum == N) break;
      *heaviest += N - sum;
    }
  }
  f.values.resize(f.weights.size());
  for (std::size_t i = 0; i < f.weights.size(); ++i) f.values[i] = f.weights[i] / vol;
  return f;
}

}  // namespace

DensityField density_field(const std::vector<Mat>& point_sets, const GridSpec& grid) {
  grid.validate();
  if (point_sets.empty()) throw DomainError("density_field: no point sets");
  const auto N = point_sets.front().rows();
  std::vector<double> counts(grid.cells(), 0.0);
  std::vector<std::size_t> escaped;
  std::size_t row_base = 0;
  for (const auto& pts : point_sets) {
    if (pts.rows() != N) throw ShapeError("density_field: point sets differ in size");
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      const auto cell = grid.locate(pts.row(r).transpose());
      if (cell) counts[*cell] += 1.0;
      else escaped.push_back(row_base + static_cast<std::size_t>(r));
    }
    row_base += static_cast<std::size_t>(pts.rows());
  }
  if (!escaped.empty()) report_escapees(escaped, escaped.size(), "points");
  return finish_density(grid, std::move(counts), static_cast<double>(N),
                        static_cast<double>(row_base));
}

DensityField density_field(const std::vector<CycleRecord>& records, const GridSpec& grid,
                           double s_slice) {
  if (records.empty()) throw DomainError("density_field: no records");
  std::vector<Mat> sets;
  sets.reserve(records.size());
  for (const auto& rec : records) sets.push_back(rec.at(s_slice).x);
  return density_field(sets, grid);
}

DensityField worldline_density(std::size_t count, const WorldLineGenerator& line,
                               const GridSpec& grid) {
  grid.validate();
  if (count == 0) throw DomainError("worldline_density: no world lines");
  std::vector<double> counts(grid.cells(), 0.0);
  std::vector<std::size_t> escaped;
  std::vector<std::size_t> visited;
  std::vector<Vec> points;
  double total = 0.0;
  for (std::size_t l = 0; l < count; ++l) {
    points.clear();
    line(l, points);
    visited.clear();
    bool out = false;
    for (const auto& x : points) {
      const auto cell = grid.locate(x);
      if (!cell) {
        out = true;
        break;
      }
      visited.push_back(*cell);
    }
    if (out) {
      escaped.push_back(l);
      continue;
    }
    std::sort(visited.begin(), visited.end());
    visited.erase(std::unique(visited.begin(), visited.end()), visited.end());
    for (auto c : visited) counts[c] += 1.0;
    total += static_cast<double>(visited.size());
  }
  if (!escaped.empty()) report_escapees(escaped, escaped.size(), "world lines");
  if (total == 0.0) throw DomainError("worldline_density: world lines carry no points");
  return finish_density(grid, std::move(counts), static_cast<double>(count), total);
}

DensityField worldline_density(const std::vector<std::vector<Vec>>& lines, const GridSpec& grid) {
  return worldline_density(
      lines.size(), [&](std::size_t l, std::vector<Vec>& out) { out = lines[l]; }, grid);
}

PhaseModel PhaseModel::constant(double theta0) {
  PhaseModel m;
  m.kind = Kind::constant;
  m.theta0 = theta0;
  return m;
}

PhaseModel PhaseModel::plane_wave(Vec k, Vec origin) {
  if (k.size() != origin.size()) throw ShapeError("PhaseModel: k and origin differ in length");
  PhaseModel m;
  m.kind = Kind::plane_wave;
  m.k = std::move(k);
  m.origin = std::move(origin);
  return m;
}

PhaseModel PhaseModel::cell_field(std::vector<double> phases) {
  PhaseModel m;
  m.kind = Kind::cell_field;
  m.cell_phase = std::move(phases);
  return m;
}

double PhaseModel::at(const GridSpec& grid, std::size_t cell) const {
  switch (kind) {
    case Kind::constant: return theta0;
    case Kind::plane_wave: {
      if (k.size() != grid.rank()) throw ShapeError("PhaseModel: wave vector rank mismatch");
      return k.dot(grid.cell_center(cell) - origin);
    }
    case Kind::cell_field:
      if (cell >= cell_phase.size()) throw ShapeError("PhaseModel: cell field too small");
      return cell_phase[cell];
  }
  return 0.0;
}

PhaseModel random_cell_phases(const Mat& points, const std::vector<double>& phases,
                              const GridSpec& grid) {
  grid.validate();
  if (static_cast<std::size_t>(points.rows()) != phases.size()) {
    throw ShapeError("random_cell_phases: one phase per point required");
  }
  std::vector<std::complex<double>> acc(grid.cells(), {0.0, 0.0});
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const auto cell = grid.locate(points.row(r).transpose());
    if (cell) acc[*cell] += std::polar(1.0, phases[static_cast<std::size_t>(r)]);
  }
  std::vector<double> out(acc.size(), 0.0);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (std::abs(acc[i]) > 0.0) out[i] = std::arg(acc[i]);
  }
  return PhaseModel::cell_field(std::move(out));
}

double EmergentWaveFunction::norm() const {
  double total = 0.0;
  for (const auto& z : psi) total += std::norm(z);
  return total * grid.cell_volume();
}

EmergentWaveFunction assemble_wavefunction(const DensityField& n2, const PhaseModel& phase) {
  n2.grid.validate();
  if (n2.values.size() != n2.grid.cells()) throw ShapeError("assemble_wavefunction: bad field size");
  for (std::size_t i = 0; i < n2.values.size(); ++i) {
    if (!(n2.values[i] >= 0.0) || !std::isfinite(n2.values[i])) {
      throw DataCorruptionError("assemble_wavefunction: invalid density in cell " +
                                std::to_string(i));
    }
  }
  const double N = n2.integral();
  if (!(N > 0.0)) throw DataCorruptionError("assemble_wavefunction: density integrates to zero");
  EmergentWaveFunction wf;
  wf.grid = n2.grid;
  wf.N = N;
  wf.psi.resize(n2.values.size());
  wf.phase.resize(n2.values.size());
  for (std::size_t i = 0; i < n2.values.size(); ++i) {
    const double theta = phase.at(n2.grid, i);
    wf.phase[i] = theta;
    wf.psi[i] = std::polar(std::sqrt(n2.values[i] / N), theta);
  }
  return wf;
}

std::complex<double> inner_product(const EmergentWaveFunction& a, const EmergentWaveFunction& b) {
  if (!(a.grid == b.grid) || a.psi.size() != b.psi.size()) {
    throw ShapeError("inner_product: wave functions live on different grids");
  }
  std::complex<double> total{0.0, 0.0};
  for (std::size_t i = 0; i < a.psi.size(); ++i) total += std::conj(a.psi[i]) * b.psi[i];
  return total * a.grid.cell_volume();
}

EmergentWaveFunction superpose(const EmergentWaveFunction& a, const EmergentWaveFunction& b) {
  if (!(a.grid == b.grid)) throw ShapeError("superpose: wave functions live on different grids");
  EmergentWaveFunction out;
  out.grid = a.grid;
  out.N = a.N;
  out.psi.resize(a.psi.size());
  out.phase.resize(a.psi.size());
  for (std::size_t i = 0; i < a.psi.size(); ++i) out.psi[i] = a.psi[i] + b.psi[i];
  const double n = out.norm();
  if (!(n > 1e-24 * (a.norm() + b.norm()))) {
    throw DomainError("superpose: superposition vanishes identically");
  }
  const double C = 1.0 / std::sqrt(n);
  for (std::size_t i = 0; i < out.psi.size(); ++i) {
    out.psi[i] *= C;
    out.phase[i] = std::arg(out.psi[i]);
  }
  return out;
}

BornCheck born_check(const DensityField& n2, const EmergentWaveFunction& psi, double N) {
  BornCheck c;
  c.norm_error = std::abs(psi.norm() - 1.0);
  for (std::size_t i = 0; i < n2.values.size(); ++i) {
    const double diff = std::abs(psi.N * std::norm(psi.psi[i]) - n2.values[i]);
    c.max_cell_error = std::max(c.max_cell_error, diff / std::max(1.0, n2.values[i]));
  }
  c.integral_error = std::abs(n2.integral() - N);
  return c;
}

Units Units::si() { return {constants::hbar, constants::c}; }

double semi_period(double M_sys, double alpha_et, const Units& units) {
  if (!(M_sys > 0.0)) throw DomainError("semi_period: system mass must be positive");
  if (!(alpha_et > 0.0)) throw DomainError("semi_period: alpha must be positive");
  return alpha_et * units.hbar / (M_sys * units.c * units.c);
}

double correlation_bound(double T, double c) {
  if (!(T > 0.0) || !(c > 0.0)) throw DomainError("correlation_bound: T and c must be positive");
  return 2.0 * T * c;
}

double correlation_bound_mass(double M_sys, double alpha_et, const Units& units) {
  if (M_sys < 0.0) throw DomainError("correlation_bound: negative mass");
  if (!(alpha_et > 0.0)) throw DomainError("correlation_bound: alpha must be positive");
  if (M_sys == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * alpha_et * units.hbar / (units.c * M_sys);
}

io::Table density_table(const DensityField& field) {
  std::vector<std::string> cols{"cell"};
  for (int a = 0; a < field.grid.rank(); ++a) cols.push_back("c" + std::to_string(a));
  cols.push_back("value");
  io::Table t(std::move(cols));
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    std::vector<io::Cell> row{static_cast<std::int64_t>(i)};
    const Vec c = field.grid.cell_center(i);
    for (Eigen::Index a = 0; a < c.size(); ++a) row.emplace_back(c[a]);
    row.emplace_back(field.values[i]);
    t.add_row(std::move(row));
  }
  return t;
}

io::Table wavefunction_table(const EmergentWaveFunction& wf) {
  std::vector<std::string> cols{"cell"};
  for (int a = 0; a < wf.grid.rank(); ++a) cols.push_back("c" + std::to_string(a));
  for (const char* c : {"re", "im", "prob"}) cols.emplace_back(c);
  io::Table t(std::move(cols));
  for (std::size_t i = 0; i < wf.psi.size(); ++i) {
    std::vector<io::Cell> row{static_cast<std::int64_t>(i)};
    const Vec c = wf.grid.cell_center(i);
    for (Eigen::Index a = 0; a < c.size(); ++a) row.emplace_back(c[a]);
    row.emplace_back(wf.psi[i].real());
    row.emplace_back(wf.psi[i].imag());
    row.emplace_back(std::norm(wf.psi[i]));
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace hrs
