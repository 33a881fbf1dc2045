#include "hrs/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "hrs/constants.hpp"
#include "hrs/dynamics.hpp"
#include "hrs/error.hpp"
#include "hrs/flow.hpp"
#include "hrs/lipschitz.hpp"
#include "hrs/parallel.hpp"
#include "hrs/quantization.hpp"
#include "hrs/rng.hpp"

namespace hrs {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<int> spatial_axes(int d) {
  std::vector<int> axes;
  for (int a = 1; a < d; ++a) axes.push_back(a);
  return axes;
}

GridSpec cube_grid(int d, double half_width, double spacing) {
  GridSpec g;
  const int cells = static_cast<int>(std::lround(2.0 * half_width / spacing));
  g.origin = Vec::Constant(d - 1, -half_width);
  g.spacing = Vec::Constant(d - 1, spacing);
  g.shape.assign(static_cast<std::size_t>(d - 1), cells);
  g.axes = spatial_axes(d);
  return g;
}

// Random momentum in the open cone of a Minkowski-type block metric:
// unit time component per block and small spatial parts.
std::vector<PhasePoint> cone_probes(const RandersStructure& s, std::size_t count,
                                    std::uint64_t seed) {
  const int n = s.size();
  const int d = s.spacetime_dim();
  std::vector<PhasePoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    StreamRng rng(seed, stream_id(0xC0E, i));
    PhasePoint pt(Vec::Zero(n), Vec::Zero(n));
    for (int j = 0; j < n; ++j) pt.u[j] = rng.uniform(-1.0, 1.0);
    for (int k = 0; k < s.molecules(); ++k) {
      for (int sector = 0; sector < 2; ++sector) {
        const int base = 2 * d * k + sector * d;
        pt.p[base] = 1.0 + rng.uniform();
        for (int a = 1; a < d; ++a) pt.p[base + a] = rng.uniform(-0.3, 0.3);
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace

// ---- collapse cycles -------------------------------------------------------

CollapseResult run_collapse(const RunConfig& cfg) {
  EnsembleInit init;
  init.N = cfg.geometry.N;
  init.d = cfg.geometry.d;
  init.spread = cfg.ensemble.spread;
  init.distribution = cfg.ensemble.distribution;
  init.m = cfg.ensemble.m;
  init.M_sys = cfg.ensemble.M_sys;
  init.T = cfg.flow.T;
  init.seed = cfg.ensemble.seed;
  MoleculeEnsemble e = make_ensemble(init);
  const CycleConfig cc = cfg.cycle_config();
  CollapseResult out;
  for (int n = 0; n < cfg.ensemble.cycles; ++n) {
    out.records.push_back(run_cycle(e, cc, n));
    out.metrics.push_back(collapse_metrics(out.records.back(), cfg.ensemble.sigma_f,
                                           cfg.ensemble.collapse_threshold, cfg.geometry.N));
    if (out.metrics.back().collapsed) ++out.collapse_events;
  }
  return out;
}

// ---- double slit -----------------------------------------------------------

DoubleSlitParams double_slit_params(const RunConfig& cfg) {
  const Section s = cfg.section("double_slit");
  DoubleSlitParams p;
  p.separation = s.positive("separation", p.separation);
  p.slit_width = s.positive("slit_width", p.slit_width);
  p.wavelength = s.positive("wavelength", p.wavelength);
  p.fan = s.positive("fan", p.fan);
  if (p.fan >= 0.5 * std::numbers::pi) s.fail("fan", "must be below pi/2");
  p.length = s.positive("length", p.length);
  p.half_height = s.positive("half_height", p.half_height);
  p.spacing = s.positive("spacing", p.spacing);
  p.per_slit = s.integer("per_slit", p.per_slit);
  if (p.per_slit < 1) s.fail("per_slit", "must be at least 1");
  p.closed = s.string("closed", p.closed);
  if (p.closed != "none" && p.closed != "a" && p.closed != "b") {
    s.fail("closed", "expected none, a or b");
  }
  const std::string phase = s.string("phase", "plane_wave");
  if (phase == "plane_wave") p.phase = SlitPhase::plane_wave;
  else if (phase == "constant") p.phase = SlitPhase::constant;
  else if (phase == "random") p.phase = SlitPhase::random;
  else s.fail("phase", "expected plane_wave, constant or random");
  if (cfg.geometry.d != 3) cfg.section("geometry").fail("d", "double_slit needs d = 3");
  p.T = cfg.flow.T;
  p.seed = cfg.ensemble.seed;
  return p;
}

double dominant_period(const std::vector<double>& y, const std::vector<double>& signal, double lo,
                       double hi, int steps) {
  if (y.size() != signal.size() || y.size() < 4) throw ShapeError("dominant_period: bad input");
  if (!(lo > 0.0 && hi > lo)) throw DomainError("dominant_period: need 0 < lo < hi");
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(signal.size());
  double best = lo, best_power = -1.0;
  for (int i = 0; i <= steps; ++i) {
    const double period = lo * std::pow(hi / lo, static_cast<double>(i) / steps);
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      acc += (signal[j] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * y[j] / period);
    }
    if (std::norm(acc) > best_power) {
      best_power = std::norm(acc);
      best = period;
    }
  }
  return best;
}

DoubleSlitResult run_double_slit(const DoubleSlitParams& p) {
  const double y_a = 0.5 * p.separation;
  const double y_b = -0.5 * p.separation;
  const double reach = y_a + 0.5 * p.slit_width;
  if (reach >= p.half_height) throw GeometryError("double slit: aperture outside grid");
  if (reach + p.length * std::tan(p.fan) >= p.half_height) {
    throw GeometryError("double slit: emission fan leaves the grid before the far line");
  }

  DoubleSlitResult r;
  GridSpec& g = r.grid;
  g.origin = (Vec(2) << 0.0, -p.half_height).finished();
  g.spacing = Vec::Constant(2, p.spacing);
  g.shape = {static_cast<int>(std::lround(p.length / p.spacing)),
             static_cast<int>(std::lround(2.0 * p.half_height / p.spacing))};
  g.axes = {1, 2};
  g.validate();
  const double z_end = g.shape[0] * p.spacing;
  const double dz = 0.5 * p.spacing;

  // World line from a slit: straight ray through a random aperture point at a
  // random fan angle. Components are (t, z, y) with unit speed.
  auto ray = [&](StreamRng& rng, double y_slit, std::vector<Vec>& out) {
    const double y0 = y_slit + p.slit_width * (rng.uniform() - 0.5);
    const double theta = p.fan * (2.0 * rng.uniform() - 1.0);
    const double slope = std::tan(theta);
    const double inv_cos = 1.0 / std::cos(theta);
    for (int j = 0;; ++j) {
      const double z = j * dz;
      if (z >= z_end) break;
      out.push_back((Vec(3) << z * inv_cos, z, y0 + z * slope).finished());
    }
  };
  auto slit_density = [&](int slit, double y_slit) {
    return worldline_density(
        static_cast<std::size_t>(p.per_slit),
        [&](std::size_t i, std::vector<Vec>& out) {
          StreamRng rng(p.seed, stream_id(0xD5, static_cast<std::uint64_t>(slit), i));
          ray(rng, y_slit, out);
        },
        g);
  };

  const double screen_z = (g.shape[0] - 0.5) * p.spacing;
  auto phase_for = [&](int slit, double y_slit) {
    switch (p.phase) {
      case SlitPhase::constant: return PhaseModel::constant(0.0);
      case SlitPhase::plane_wave: {
        Vec dir(2);
        dir << screen_z, -y_slit;
        const Vec k = (2.0 * std::numbers::pi / p.wavelength) * dir.normalized();
        return PhaseModel::plane_wave(k, (Vec(2) << 0.0, y_slit).finished());
      }
      case SlitPhase::random: break;
    }
    const std::size_t stride = 10;
    std::vector<Vec> pts;
    std::vector<double> phases;
    std::vector<Vec> line;
    for (int i = 0; i < p.per_slit; ++i) {
      StreamRng rng(p.seed, stream_id(0xD5, static_cast<std::uint64_t>(slit),
                                      static_cast<std::uint64_t>(i)));
      line.clear();
      ray(rng, y_slit, line);
      StreamRng prng(p.seed, stream_id(0xD6, static_cast<std::uint64_t>(slit),
                                       static_cast<std::uint64_t>(i)));
      const double phi = 2.0 * std::numbers::pi * prng.uniform();
      for (std::size_t j = 0; j < line.size(); j += stride) {
        pts.push_back(line[j]);
        phases.push_back(phi);
      }
    }
    Mat points(static_cast<Eigen::Index>(pts.size()), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      points.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    }
    return random_cell_phases(points, phases, g);
  };

  auto zero_wave = [&] {
    EmergentWaveFunction w;
    w.grid = g;
    w.psi.assign(g.cells(), {0.0, 0.0});
    w.phase.assign(g.cells(), 0.0);
    return w;
  };
  DensityField n2_a, n2_b;
  if (p.closed != "a") {
    n2_a = slit_density(0, y_a);
    r.psi_a = assemble_wavefunction(n2_a, phase_for(0, y_a));
    r.born_a = born_check(n2_a, r.psi_a, static_cast<double>(p.per_slit));
  } else {
    r.psi_a = zero_wave();
  }
  if (p.closed != "b") {
    n2_b = slit_density(1, y_b);
    r.psi_b = assemble_wavefunction(n2_b, phase_for(1, y_b));
    r.born_b = born_check(n2_b, r.psi_b, static_cast<double>(p.per_slit));
  } else {
    r.psi_b = zero_wave();
  }
  r.psi = superpose(r.psi_a, r.psi_b);

  // Two-time run: each molecule crosses one slit, chosen by its internal time.
  const DensityField n2_hr = worldline_density(
      2 * static_cast<std::size_t>(p.per_slit),
      [&](std::size_t i, std::vector<Vec>& out) {
        StreamRng rng(p.seed, stream_id(0xD7, i));
        const double t = 2.0 * p.T * rng.uniform();
        const bool through_a = t < p.T;
        if (through_a && p.closed == "a") return;
        if (!through_a && p.closed == "b") return;
        ray(rng, through_a ? y_a : y_b, out);
      },
      g);

  const int rows = g.shape[1];
  std::vector<std::size_t> screen(static_cast<std::size_t>(rows));
  for (int iy = 0; iy < rows; ++iy) {
    const double y = g.origin[1] + (iy + 0.5) * p.spacing;
    screen[static_cast<std::size_t>(iy)] = *g.locate((Vec(3) << 0.0, screen_z, y).finished());
    r.screen_y.push_back(y);
  }
  double sum_sup = 0.0, sum_hr = 0.0, cross = 0.0, direct = 0.0;
  for (auto c : screen) {
    const double a = std::abs(r.psi_a.psi[c]);
    const double b = std::abs(r.psi_b.psi[c]);
    r.amp_a.push_back(a);
    r.amp_b.push_back(b);
    r.prob_superposed.push_back(std::norm(r.psi.psi[c]));
    r.prob_two_time.push_back(n2_hr.values[c]);
    sum_sup += r.prob_superposed.back();
    sum_hr += r.prob_two_time.back();
    cross += 2.0 * a * b;
    direct += a * a + b * b;
  }
  for (double& v : r.prob_superposed) v = sum_sup > 0.0 ? v / (sum_sup * p.spacing) : 0.0;
  for (double& v : r.prob_two_time) v = sum_hr > 0.0 ? v / (sum_hr * p.spacing) : 0.0;
  for (std::size_t i = 0; i < screen.size(); ++i) {
    r.l1_gap += std::abs(r.prob_superposed[i] - r.prob_two_time[i]) * p.spacing;
  }
  r.visibility = direct > 0.0 ? cross / direct : 0.0;

  const double D = std::hypot(screen_z, 0.5 * p.separation);
  r.fringe_expected = p.wavelength * D / p.separation;
  if (p.closed == "none") {
    std::vector<double> ys, is;
    for (std::size_t i = 0; i < screen.size(); ++i) {
      if (r.amp_a[i] > 0.0 && r.amp_b[i] > 0.0) {
        ys.push_back(r.screen_y[i]);
        is.push_back(r.prob_superposed[i]);
      }
    }
    if (ys.size() >= 8) {
      const double width = ys.back() - ys.front();
      r.fringe_measured = dominant_period(ys, is, 4.0 * p.spacing, width / 3.0);
    }
    const std::size_t lo = screen.size() / 2 - 1, hi = screen.size() / 2;
    const double a = r.amp_a[lo] + r.amp_a[hi];
    const double b = r.amp_b[lo] + r.amp_b[hi];
    r.midline_ratio = b > 0.0 ? a / b : 0.0;
    const double ca =
        (n2_a.weights[screen[lo]] + n2_a.weights[screen[hi]]) * n2_a.hits_per_weight;
    const double cb =
        (n2_b.weights[screen[lo]] + n2_b.weights[screen[hi]]) * n2_b.hits_per_weight;
    r.midline_tolerance =
        ca > 0.0 && cb > 0.0 ? 3.0 * std::sqrt(0.25 / ca + 0.25 / cb) : 1.0;
  }
  return r;
}

// ---- weak equivalence --------------------------------------------------------

WepParams wep_params(const RunConfig& cfg) {
  const Section s = cfg.section("wep");
  WepParams p;
  p.N = s.integer("N", cfg.geometry.N);
  if (p.N < 1) s.fail("N", "must be at least 1");
  p.d = cfg.geometry.d;
  p.steps = s.integer("steps", p.steps);
  if (p.steps < 1) s.fail("steps", "must be at least 1");
  p.grid_unit = s.positive("grid_unit", cfg.ensemble.spread);
  p.spread = cfg.ensemble.spread;
  p.T = cfg.flow.T;
  p.cycle = cfg.cycle_config();
  p.scaling_seeds = s.integer("scaling_seeds", 0);
  if (p.scaling_seeds < 0) s.fail("scaling_seeds", "must be non-negative");
  auto system = [&](const std::string& key, WepSystem def) {
    const Section sys = s.child(key);
    try {
      def.shape = parse_jitter_shape(sys.string("jitter_shape", std::string(to_string(def.shape))));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& ex) {
      sys.fail("jitter_shape", ex.what());
    }
    const std::string dist = sys.string(
        "distribution", def.distribution == InitialDistribution::gaussian ? "gaussian" : "uniform");
    try {
      def.distribution = parse_initial_distribution(dist);
    } catch (const Error& ex) {
      sys.fail("distribution", ex.what());
    }
    def.m = sys.positive("m", def.m);
    def.seed = sys.has("seed") ? sys.uint64("seed") : def.seed;
    return def;
  };
  p.a = system("a", {JitterShape::uniform, InitialDistribution::gaussian, 1.0,
                     cfg.ensemble.seed});
  p.b = system("b", {JitterShape::triangular, InitialDistribution::uniform, 1.0,
                     cfg.ensemble.seed + 1});
  return p;
}

namespace {

struct WepRun {
  std::vector<Vec> median_a, median_b;
  std::vector<double> deviation;
  double max_deviation = 0.0;
};

MoleculeEnsemble wep_system(const WepParams& p, const WepSystem& sys, int N,
                            std::uint64_t seed) {
  EnsembleInit init;
  init.N = N;
  init.d = p.d;
  init.center = Vec::Zero(p.d - 1);
  init.spread = p.spread;
  init.distribution = sys.distribution;
  init.recenter_median = true;
  init.m = sys.m;
  init.M_sys = sys.m * N;
  init.T = p.T;
  init.seed = seed;
  return make_ensemble(init);
}

WepRun wep_run(const WepParams& p, int N, std::uint64_t seed_a, std::uint64_t seed_b) {
  MoleculeEnsemble ea = wep_system(p, p.a, N, seed_a);
  MoleculeEnsemble eb = wep_system(p, p.b, N, seed_b);
  WepRun run;
  run.median_a.push_back(spatial_median(ea.positions()));
  run.median_b.push_back(spatial_median(eb.positions()));
  const double scale = std::max(1.0, run.median_a[0].cwiseAbs().maxCoeff());
  if ((run.median_a[0] - run.median_b[0]).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw SetupError("wep: systems must share the initial median");
  }
  CycleConfig ca = p.cycle, cb = p.cycle;
  ca.shape = p.a.shape;
  cb.shape = p.b.shape;
  run.deviation.push_back((run.median_a[0] - run.median_b[0]).norm() / p.grid_unit);
  for (int n = 0; n < p.steps; ++n) {
    const CycleRecord ra = run_cycle(ea, ca, n);
    const CycleRecord rb = run_cycle(eb, cb, n);
    run.median_a.push_back(spatial_median(ra.at(p.T).x));
    run.median_b.push_back(spatial_median(rb.at(p.T).x));
    run.deviation.push_back((run.median_a.back() - run.median_b.back()).norm() / p.grid_unit);
  }
  run.max_deviation = *std::max_element(run.deviation.begin(), run.deviation.end());
  return run;
}

}  // namespace

io::Table WepReport::to_table() const {
  std::vector<std::string> cols = {"tau", "deviation"};
  const auto dim = median_a.empty() ? 0 : median_a.front().size();
  for (Eigen::Index j = 0; j < dim; ++j) cols.push_back("median_a_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < dim; ++j) cols.push_back("median_b_" + std::to_string(j + 1));
  cols.push_back("clt_envelope");
  cols.push_back("log10_paper_bound");
  io::Table t(cols);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    std::vector<io::Cell> row = {tau[i], deviation[i]};
    for (Eigen::Index j = 0; j < dim; ++j) row.emplace_back(median_a[i][j]);
    for (Eigen::Index j = 0; j < dim; ++j) row.emplace_back(median_b[i][j]);
    row.emplace_back(envelope);
    row.emplace_back(log10_paper_bound);
    t.add_row(std::move(row));
  }
  return t;
}

ojson WepReport::to_json() const {
  return {{"max_deviation_grid_units", io::number(max_deviation)},
          {"clt_envelope", io::number(envelope)},
          {"within_envelope", within_envelope},
          {"log10_paper_bound", io::number(log10_paper_bound)},
          {"tau_steps", tau.empty() ? 0 : tau.size() - 1},
          {"scaling_seeds", scaling_seeds},
          {"mean_max_deviation_N", io::number(mean_max_deviation_N)},
          {"mean_max_deviation_2N", io::number(mean_max_deviation_2N)},
          {"scaling_ratio", io::number(scaling_ratio)},
          {"scaling_target", io::number(std::sqrt(2.0))}};
}

WepReport run_wep(const WepParams& p) {
  const WepRun run = wep_run(p, p.N, p.a.seed, p.b.seed);
  WepReport rep;
  for (std::size_t i = 0; i < run.deviation.size(); ++i) {
    rep.tau.push_back(2.0 * p.T * static_cast<double>(i));
  }
  rep.median_a = run.median_a;
  rep.median_b = run.median_b;
  rep.deviation = run.deviation;
  rep.max_deviation = run.max_deviation;
  rep.envelope = 5.0 / std::sqrt(static_cast<double>(p.N));
  rep.within_envelope = rep.max_deviation < rep.envelope;
  rep.log10_paper_bound = (std::log(0.5) - 32.0 * double(p.N) * double(p.N)) / std::log(10.0);
  rep.scaling_seeds = p.scaling_seeds;
  if (p.scaling_seeds > 0) {
    const auto seeds = static_cast<std::size_t>(p.scaling_seeds);
    std::vector<double> dev_n(seeds), dev_2n(seeds);
    parallel_chunks(seeds, 1, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        const std::uint64_t sa = stream_id(p.a.seed, 0x5CA1E, k);
        const std::uint64_t sb = stream_id(p.b.seed, 0x5CA1F, k);
        dev_n[k] = wep_run(p, p.N, sa, sb).max_deviation;
        dev_2n[k] = wep_run(p, 2 * p.N, sa, sb).max_deviation;
      }
    });
    for (std::size_t k = 0; k < seeds; ++k) {
      rep.mean_max_deviation_N += dev_n[k] / static_cast<double>(seeds);
      rep.mean_max_deviation_2N += dev_2n[k] / static_cast<double>(seeds);
    }
    rep.scaling_ratio = rep.mean_max_deviation_2N > 0.0
                            ? rep.mean_max_deviation_N / rep.mean_max_deviation_2N
                            : 0.0;
  }
  return rep;
}

// ---- concentration suite -----------------------------------------------------

ConcentrationSuiteParams concentration_params(const RunConfig& cfg) {
  const Section s = cfg.section("concentration");
  ConcentrationSuiteParams p;
  p.sphere_dim = s.integer("sphere_dim", p.sphere_dim);
  if (p.sphere_dim < 2) s.fail("sphere_dim", "must be at least 2");
  p.sphere_samples = static_cast<std::size_t>(s.integer("sphere_samples", 100000));
  p.gaussian_dim = s.integer("gaussian_dim", p.gaussian_dim);
  if (p.gaussian_dim < 1) s.fail("gaussian_dim", "must be at least 1");
  p.gaussian_samples = static_cast<std::size_t>(s.integer("gaussian_samples", 100000));
  if (p.sphere_samples < 1 || p.gaussian_samples < 1) s.fail("samples", "must be positive");
  p.rho_P = s.positive("rho_P", p.rho_P);
  if (s.has("epsilons")) {
    const Vec e = s.vector("epsilons");
    p.epsilons.assign(e.data(), e.data() + e.size());
  }
  if (s.has("rhos")) {
    const Vec r = s.vector("rhos");
    p.rhos.assign(r.data(), r.data() + r.size());
  }
  p.seed = cfg.ensemble.seed;
  return p;
}

ConcentrationSuiteResult run_concentration_suite(const ConcentrationSuiteParams& p) {
  ConcentrationSuiteResult r;
  const int sphere_n = p.sphere_dim;
  std::vector<double> sphere_values(p.sphere_samples);
  parallel_chunks(p.sphere_samples, 1024, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) sphere_values[i] = sphere_point(sphere_n - 1, p.seed, i)[0];
  });
  r.sphere = concentration_profile(sphere_values, p.epsilons, [&](double eps) {
    return bound(BoundKind::sphere, {static_cast<double>(sphere_n), eps, 0.0, 1.0});
  });
  for (double eps : p.epsilons) {
    r.sphere_alt_bound.push_back(sphere_bound_alt_constant(sphere_n, eps));
  }

  std::vector<double> gauss_values(p.gaussian_samples);
  parallel_chunks(p.gaussian_samples, 1024, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      gauss_values[i] = p.rho_P * gaussian_point(p.gaussian_dim, p.seed, i)[0];
    }
  });
  std::vector<double> rho_grid;
  for (double m : p.rhos) rho_grid.push_back(m * p.rho_P);
  r.gaussian = concentration_profile(gauss_values, rho_grid, [&](double rho) {
    return bound(BoundKind::gaussian, {0.0, 0.0, rho, p.rho_P});
  });
  for (double rho : rho_grid) {
    std::size_t above = 0;
    for (double v : gauss_values) above += (v - r.gaussian.levy_mean > rho) ? 1 : 0;
    r.gaussian_one_sided.push_back(static_cast<double>(above) /
                                   static_cast<double>(gauss_values.size()));
  }
  return r;
}

// ---- decomposition -----------------------------------------------------------

DecomposeParams decompose_params(const RunConfig& cfg) {
  const Section s = cfg.section("decompose");
  DecomposeParams p;
  p.d = cfg.geometry.d;
  p.molecules = s.integer("molecules", 1);
  if (p.molecules < 1) s.fail("molecules", "must be at least 1");
  p.beta = cfg.geometry.beta;
  p.half_width = s.positive("half_width", p.half_width);
  p.probes = static_cast<std::size_t>(s.integer("probes", 10000));
  p.seed = cfg.ensemble.seed;
  return p;
}

DecomposeResult run_decompose(const DecomposeParams& p) {
  const DriftField beta = p.beta.tiled(p.molecules);
  const int n = beta.size();
  const PhaseFunction H = [beta, n](const Vec& z) {
    return beta(z.head(n)).dot(z.tail(n));
  };
  const Box K = Box::cube(2 * n, p.half_width);
  CertifyOptions opts;
  opts.seed = p.seed;
  DecomposeResult r;
  r.raw = certify_lipschitz_on_compact(H, K, opts);
  const double M = r.raw.normalization;
  const PhaseFunction Hn = [H, M](const Vec& z) { return H(z) / M; };
  r.normalized = certify_lipschitz_on_compact(Hn, K, opts);
  const RadialProfile profile = default_profile(Hn, K, p.seed);
  r.profile = profile.name;
  const Decomposition dec = radial_decompose(Hn, K, profile);
  r.lipschitz_part = certify_lipschitz_on_compact(dec.lipschitz_part, K.scaled(2.0), opts);

  const Box wide = K.scaled(3.0);
  std::vector<Vec> probes;
  probes.reserve(p.probes);
  for (std::size_t i = 0; i < p.probes; ++i) {
    StreamRng rng(p.seed, stream_id(0xDEC, i));
    Vec z(2 * n);
    for (int j = 0; j < 2 * n; ++j) z[j] = rng.uniform(wide.lo[j], wide.hi[j]);
    probes.push_back(std::move(z));
  }
  r.reconstruction_residual = decomposition_residual(Hn, dec, probes);
  for (const auto& z : probes) {
    const double m = std::abs(dec.matter_part(z));
    if (K.contains(z)) r.matter_inside_max = std::max(r.matter_inside_max, m);
    else r.matter_outside_max = std::max(r.matter_outside_max, m);
  }
  for (std::size_t i = 0; i < p.probes; ++i) {
    StreamRng rng(p.seed, stream_id(0xDED, i));
    Vec z(2 * n);
    for (int j = 0; j < 2 * n; ++j) z[j] = rng.uniform(K.lo[j], K.hi[j]);
    r.matter_inside_max = std::max(r.matter_inside_max, std::abs(dec.matter_part(z)));
  }
  return r;
}

io::Table alpha_sweep_table() {
  using namespace constants;
  constexpr double proton_mass = 1.67262192369e-27;
  struct Row {
    const char* label;
    double m, M, r, lambda;
  };
  const std::vector<Row> rows = {
      {"planck", planck_mass(), planck_mass(), planck_length(), 1.0},
      {"planck_lambda_0.5", planck_mass(), planck_mass(), planck_length(), 0.5},
      {"planck_lambda_2", planck_mass(), planck_mass(), planck_length(), 2.0},
      {"planck_lambda_4", planck_mass(), planck_mass(), planck_length(), 4.0},
      {"electron_bohr", electron_mass, proton_mass, bohr_radius, 1.0},
      {"proton_fermi", proton_mass, proton_mass, 1e-15, 1.0},
      {"kilogram_metre", 1.0, 1.0, 1.0, 1.0},
  };
  io::Table t({"label", "m", "M", "r", "lambda", "D_ratio", "E_ratio", "alpha_compact",
               "alpha_general"});
  for (const auto& row : rows) {
    const NewtonAlpha a = newton_alpha(row.m, row.M, row.r, row.lambda);
    t.add_row({std::string(row.label), row.m, row.M, row.r, row.lambda, a.D_ratio, a.E_ratio,
               a.compact, a.general});
  }
  return t;
}

// ---- scenario runner ---------------------------------------------------------

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, io::TableFormat fmt)
      : dir_(std::move(dir)), fmt_(fmt) {}
  void table(std::string_view stem, const io::Table& t) {
    files_.push_back(io::write_table(dir_, stem, t, fmt_));
  }
  void report(std::string_view stem, const ojson& doc) {
    files_.push_back(io::write_json(dir_, stem, doc));
  }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  io::TableFormat fmt_;
  std::vector<std::filesystem::path> files_;
};

ojson born_json(const BornCheck& b) {
  return {{"norm_error", io::number(b.norm_error)},
          {"max_cell_error", io::number(b.max_cell_error)},
          {"integral_error", io::number(b.integral_error)}};
}

void scenario_collapse(const RunConfig& cfg, ArtifactWriter& w) {
  const CollapseResult res = run_collapse(cfg);
  io::Table var({"cycle", "s", "t", "phase", "variance"});
  io::Table cyc({"cycle", "t_metastable", "variance_start", "variance_ergodic_end",
                 "variance_contractive_end", "variance_expansive_end", "contraction_ratio",
                 "spread_over_sigma", "collapsed", "metastable_residual"});
  ojson cycles = ojson::array();
  for (std::size_t n = 0; n < res.records.size(); ++n) {
    const CycleRecord& rec = res.records[n];
    const CollapseMetrics& m = res.metrics[n];
    for (const auto& snap : rec.snapshots) {
      var.add_row({static_cast<std::int64_t>(n), snap.s, snap.t,
                   std::string(to_string(snap.phase)), snap.variance});
    }
    cyc.add_row({static_cast<std::int64_t>(n), rec.t_offset + rec.T, m.variance_start,
                 m.variance_ergodic_end, m.variance_contractive_end, m.variance_expansive_end,
                 m.contraction_ratio, m.spread_over_sigma,
                 static_cast<std::int64_t>(m.collapsed ? 1 : 0), rec.metastable_residual});
    ojson c = m.to_json();
    c["cycle"] = n;
    c["t_metastable"] = io::number(rec.t_offset + rec.T);
    c["metastable_residual"] = io::number(rec.metastable_residual);
    cycles.push_back(std::move(c));
  }
  w.table("variance", var);
  w.table("cycles", cyc);

  const Section grid_cfg = cfg.section("collapse").child("grid");
  const GridSpec grid = cube_grid(cfg.geometry.d, grid_cfg.positive("half_width", 2.0),
                                  grid_cfg.positive("spacing", cfg.ensemble.sigma_f));
  const CycleRecord& last = res.records.back();
  const DensityField n2 = density_field(std::vector<Mat>{last.at(last.ergodic_end).x}, grid);
  const EmergentWaveFunction psi = assemble_wavefunction(n2, PhaseModel::constant(0.0));
  w.table("density", density_table(n2));
  w.table("wavefunction", wavefunction_table(psi));

  ojson rep;
  rep["scenario"] = "collapse";
  rep["cycles"] = static_cast<int>(res.records.size());
  rep["collapse_events"] = res.collapse_events;
  rep["contraction_enabled"] = cfg.flow.contraction;
  rep["interaction"] = {{"classification", "classical"},
                        {"active_near", "t = (2n+1)T"},
                        {"phase", "contractive"}};
  rep["kappa_profile"] = std::string(to_string(cfg.flow.profile));
  rep["lambda_c"] = io::number(cfg.flow.lambda_c > 0.0 ? cfg.flow.lambda_c : 5.0 / cfg.flow.T);
  rep["sigma_f"] = io::number(cfg.ensemble.sigma_f);
  rep["density_slice"] = "ergodic end of last cycle";
  rep["born"] = born_json(born_check(n2, psi, static_cast<double>(cfg.geometry.N)));
  rep["per_cycle"] = std::move(cycles);
  w.report("report", rep);
}

void scenario_double_slit(const RunConfig& cfg, ArtifactWriter& w) {
  const DoubleSlitParams p = double_slit_params(cfg);
  const DoubleSlitResult r = run_double_slit(p);
  io::Table screen({"y", "amp_a", "amp_b", "prob_superposed", "prob_two_time"});
  for (std::size_t i = 0; i < r.screen_y.size(); ++i) {
    screen.add_row({r.screen_y[i], r.amp_a[i], r.amp_b[i], r.prob_superposed[i],
                    r.prob_two_time[i]});
  }
  w.table("screen", screen);
  w.table("superposition", wavefunction_table(r.psi));
  static constexpr const char* phase_names[] = {"plane_wave", "constant", "random"};
  ojson rep;
  rep["scenario"] = "double_slit";
  rep["closed"] = p.closed;
  rep["phase_model"] = phase_names[static_cast<int>(p.phase)];
  rep["separation"] = io::number(p.separation);
  rep["slit_width"] = io::number(p.slit_width);
  rep["wavelength"] = io::number(p.wavelength);
  rep["per_slit"] = p.per_slit;
  rep["fringe_expected"] = io::number(r.fringe_expected);
  rep["fringe_measured"] = io::number(r.fringe_measured);
  rep["visibility"] = io::number(r.visibility);
  rep["midline_ratio"] = io::number(r.midline_ratio);
  rep["midline_tolerance"] = io::number(r.midline_tolerance);
  rep["midline_symmetric"] = std::abs(r.midline_ratio - 1.0) <= r.midline_tolerance;
  rep["two_time_l1_gap"] = io::number(r.l1_gap);
  rep["norm"] = io::number(r.psi.norm());
  if (p.closed != "a") rep["born_a"] = born_json(r.born_a);
  if (p.closed != "b") rep["born_b"] = born_json(r.born_b);
  w.report("report", rep);
}

void scenario_wep(const RunConfig& cfg, ArtifactWriter& w) {
  const WepReport rep = run_wep(wep_params(cfg));
  w.table("medians", rep.to_table());
  ojson doc = {{"scenario", "wep"}};
  const ojson body = rep.to_json();
  for (const auto& [k, v] : body.items()) doc[k] = v;
  w.report("report", doc);
}

void scenario_concentration(const RunConfig& cfg, ArtifactWriter& w) {
  const ConcentrationSuiteParams p = concentration_params(cfg);
  const ConcentrationSuiteResult r = run_concentration_suite(p);
  w.table("sphere", r.sphere.to_table());
  w.table("gaussian", r.gaussian.to_table());
  ojson doc;
  doc["scenario"] = "concentration";
  doc["sphere"] = r.sphere.to_json();
  doc["sphere"]["ambient_dimension"] = p.sphere_dim;
  ojson alt = ojson::array();
  for (double v : r.sphere_alt_bound) alt.push_back(io::number(v));
  doc["sphere"]["bound_sqrt_pi_over_8"] = alt;
  doc["gaussian"] = r.gaussian.to_json();
  doc["gaussian"]["dimension"] = p.gaussian_dim;
  ojson one = ojson::array();
  for (double v : r.gaussian_one_sided) one.push_back(io::number(v));
  doc["gaussian"]["one_sided_tail"] = one;
  doc["all_pass"] = r.sphere.all_pass() && r.gaussian.all_pass();
  w.report("report", doc);
}

void scenario_decompose(const RunConfig& cfg, ArtifactWriter& w) {
  const DecomposeParams p = decompose_params(cfg);
  const DecomposeResult r = run_decompose(p);
  ojson doc;
  doc["scenario"] = "decompose";
  doc["hamiltonian"] = "beta(u) . p";
  doc["beta_family"] = p.beta.family_name();
  doc["dimension"] = 4 * p.d * p.molecules;
  doc["K_half_width"] = io::number(p.half_width);
  doc["certificate_raw"] = r.raw.to_json();
  doc["certificate_normalized"] = r.normalized.to_json();
  doc["profile"] = r.profile;
  doc["certificate_lipschitz_part_2K"] = r.lipschitz_part.to_json();
  doc["reconstruction_residual"] = io::number(r.reconstruction_residual);
  doc["matter_inside_K_max"] = io::number(r.matter_inside_max);
  doc["matter_outside_K_max"] = io::number(r.matter_outside_max);
  w.report("report", doc);
  w.table("alpha_sweep", alpha_sweep_table());
}

RandersStructure scenario_structure(const RunConfig& cfg, int molecules) {
  return RandersStructure(cfg.geometry.metric, molecules, cfg.geometry.beta.tiled(molecules));
}

void scenario_residual_sweep(const RunConfig& cfg, ArtifactWriter& w) {
  const Section s = cfg.section("residual_sweep");
  const int molecules = s.integer("molecules", 2);
  if (molecules < 1) s.fail("molecules", "must be at least 1");
  const int points = s.integer("points", 41);
  if (points < 2) s.fail("points", "must be at least 2");
  const auto nprobes = static_cast<std::size_t>(s.integer("probes", 1000));
  const RandersStructure rs = scenario_structure(cfg, molecules);
  HyperboloidSampler sampler;
  sampler.count = s.integer("hyperboloid_samples", 20000);
  sampler.seed = cfg.ensemble.seed;
  const Mat h = averaged_metric(rs, Vec::Zero(rs.size()), sampler);
  const std::vector<PhasePoint> probes = cone_probes(rs, nprobes, cfg.ensemble.seed);
  const KappaSchedule sched(cfg.flow.T, cfg.flow.profile);
  w.table("residual", residual_sweep(rs, h, sched, probes, points));

  double hull = 0.0;
  for (const auto& pt : probes) {
    const double target = std::sqrt(std::abs(pt.p.dot(h * pt.p)));
    hull = std::max(hull, std::abs(ut_deform(rs, h, sched, cfg.flow.T, pt) - target));
  }
  std::vector<Vec> positions;
  for (const auto& pt : probes) positions.push_back(pt.u);
  const CommutationReport comm = commutation_check(rs, h, sched, 0.5 * cfg.flow.T, probes);
  const BerwaldReport berwald = berwald_validator(rs, positions);
  ojson doc;
  doc["scenario"] = "residual_sweep";
  doc["molecules"] = molecules;
  doc["kappa_profile"] = std::string(to_string(cfg.flow.profile));
  doc["residual_at_T"] = io::number(metastable_residual(rs, h, sched, probes, cfg.flow.T));
  doc["hull_limit_error"] = io::number(hull);
  doc["commutation"] = {{"t", io::number(0.5 * cfg.flow.T)},
                        {"max_discrepancy", io::number(comm.max_discrepancy)},
                        {"passed", comm.passed}};
  doc["berwald"] = {{"max_gradient_norm", io::number(berwald.max_gradient_norm)},
                    {"passed", berwald.passed}};
  w.report("report", doc);
}

void scenario_trajectory(const RunConfig& cfg, ArtifactWriter& w) {
  const Section s = cfg.section("trajectory");
  const int molecules = s.integer("molecules", 2);
  if (molecules < 1) s.fail("molecules", "must be at least 1");
  const double tau1 = s.positive("duration", 10.0);
  const int stride = s.integer("record_stride", 10);
  if (stride < 1) s.fail("record_stride", "must be at least 1");
  const RandersStructure rs = scenario_structure(cfg, molecules);
  const int d = cfg.geometry.d;
  PhasePoint start = cone_probes(rs, 1, cfg.ensemble.seed).front();
  start.u.setZero();
  for (int k = 0; k < molecules; ++k) start.u[2 * d * k + d] = 1.0;
  IntegratorOptions opts;
  opts.dt = cfg.dynamics.dt;
  opts.drift_factor = cfg.dynamics.drift_factor;
  opts.record_stride = stride;
  const Trajectory traj = integrate(rs, start, 0.0, tau1, opts);
  const KinematicLimits limits =
      KinematicLimits::from_min_length(cfg.dynamics.c_max, cfg.dynamics.L_min);
  const KinematicsReport kin = kinematics_check(traj, d, limits, cfg.geometry.metric);
  w.table("trajectory", trajectory_table(traj, d));
  const double h0 = drift_hamiltonian(rs, traj.states.front());
  const double h1 = drift_hamiltonian(rs, traj.states.back());
  ojson doc;
  doc["scenario"] = "trajectory";
  doc["molecules"] = molecules;
  doc["beta_family"] = cfg.geometry.beta.family_name();
  doc["samples"] = traj.times.size();
  doc["drift_hamiltonian_start"] = io::number(h0);
  doc["drift_hamiltonian_end"] = io::number(h1);
  doc["relative_drift"] = io::number(h0 != 0.0 ? std::abs(h1 - h0) / std::abs(h0) : std::abs(h1));
  doc["kinematics"] = kin.to_json();
  w.report("report", doc);
}

void scenario_correspondence(const RunConfig& cfg, ArtifactWriter& w) {
  const Section s = cfg.section("correspondence");
  const int K = s.integer("K", 256);
  const ToyHilbert th = build_operators(K, s.positive("spacing", 0.1), s.positive("hbar", 1.0));
  WavePacket packet;
  packet.x0 = s.number("x0", -2.0);
  packet.width = s.positive("width", 1.0);
  packet.k0 = s.number("k0", 0.0);
  const int steps = s.integer("steps", 100);
  if (steps < 1) s.fail("steps", "must be at least 1");
  const CorrespondenceReport rep =
      correspondence_check(s.number("b", 0.1), th, packet, s.positive("dtau", 0.01), steps,
                           cfg.dynamics.drift_factor);
  w.table("expectation", rep.to_table());
  ojson doc = {{"scenario", "correspondence"}, {"K", K}};
  const ojson body = rep.to_json();
  for (const auto& [k, v] : body.items()) doc[k] = v;
  w.report("report", doc);
}

}  // namespace

Manifest run_scenario(const RunConfig& cfg, const RunOptions& options) {
  if (options.out.empty()) throw ConfigError("output: no output directory given");
  ArtifactWriter w(options.out, options.format);
  const std::string& name = cfg.scenario;
  if (name == "collapse") scenario_collapse(cfg, w);
  else if (name == "double_slit") scenario_double_slit(cfg, w);
  else if (name == "wep") scenario_wep(cfg, w);
  else if (name == "concentration") scenario_concentration(cfg, w);
  else if (name == "decompose") scenario_decompose(cfg, w);
  else if (name == "residual_sweep") scenario_residual_sweep(cfg, w);
  else if (name == "trajectory") scenario_trajectory(cfg, w);
  else if (name == "correspondence") scenario_correspondence(cfg, w);
  else throw ConfigError("scenario: unknown scenario '" + name + "'");

  Manifest m;
  m.outputs = w.files();
  ojson outputs = ojson::array();
  for (const auto& f : m.outputs) {
    outputs.push_back({{"file", f.filename().string()}, {"fnv1a", io::file_hash(f)}});
  }
  m.doc = {{"scenario", name},
           {"version", kVersion},
           {"config_hash", cfg.hash()},
           {"seed", cfg.ensemble.seed},
           {"format", std::string(io::extension(options.format))},
           {"outputs", std::move(outputs)}};
  io::write_json(options.out, "manifest", m.doc);
  return m;
}

}  // namespace hrs
