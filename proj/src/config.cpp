#include "hrs/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hrs/error.hpp"
#include "hrs/io.hpp"

namespace hrs {

namespace {

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

const char* type_name(const json& v) { return v.type_name(); }

void check_keys(const Section& s, const json* node, const std::set<std::string>& allowed) {
  if (node == nullptr || !node->is_object()) return;
  for (const auto& [key, value] : node->items()) {
    if (!allowed.count(key)) s.fail(key, "unknown field");
  }
}

}  // namespace

Section::Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
  if (node_ != nullptr && !node_->is_object()) {
    throw ConfigError(path_ + ": expected an object, got " + type_name(*node_));
  }
}

const json* Section::lookup(const std::string& key) const {
  if (node_ == nullptr) return nullptr;
  auto it = node_->find(key);
  return it == node_->end() || it->is_null() ? nullptr : &*it;
}

bool Section::has(const std::string& key) const { return lookup(key) != nullptr; }

Section Section::child(const std::string& key) const {
  return Section(lookup(key), join_path(path_, key));
}

void Section::fail(const std::string& key, const std::string& message) const {
  throw ConfigError(join_path(path_, key) + ": " + message);
}

double Section::number(const std::string& key, std::optional<double> fallback) const {
  const json* v = lookup(key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required field is missing");
  }
  if (!v->is_number()) fail(key, std::string("expected a number, got ") + type_name(*v));
  return v->get<double>();
}

double Section::positive(const std::string& key, std::optional<double> fallback) const {
  const double v = number(key, fallback);
  if (!(v > 0.0)) fail(key, "must be positive, got " + io::format_double(v));
  return v;
}

int Section::integer(const std::string& key, std::optional<int> fallback) const {
  const json* v = lookup(key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required field is missing");
  }
  if (!v->is_number_integer()) fail(key, std::string("expected an integer, got ") + type_name(*v));
  const auto x = v->get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    fail(key, "integer out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t Section::uint64(const std::string& key) const {
  const json* v = lookup(key);
  if (v == nullptr) fail(key, "required field is missing");
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_number_integer()) fail(key, "must be non-negative");
  fail(key, std::string("expected an unsigned integer, got ") + type_name(*v));
}

bool Section::boolean(const std::string& key, std::optional<bool> fallback) const {
  const json* v = lookup(key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required field is missing");
  }
  if (!v->is_boolean()) fail(key, std::string("expected a boolean, got ") + type_name(*v));
  return v->get<bool>();
}

std::string Section::string(const std::string& key, std::optional<std::string> fallback) const {
  const json* v = lookup(key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required field is missing");
  }
  if (!v->is_string()) fail(key, std::string("expected a string, got ") + type_name(*v));
  return v->get<std::string>();
}

Vec Section::vector(const std::string& key, std::optional<Vec> fallback) const {
  const json* v = lookup(key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required field is missing");
  }
  if (!v->is_array()) fail(key, std::string("expected an array, got ") + type_name(*v));
  Vec out(static_cast<Eigen::Index>(v->size()));
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
    out[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
  }
  return out;
}

Mat Section::matrix(const std::string& key, std::optional<Mat> fallback) const {
  const json* v = lookup(key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required field is missing");
  }
  if (!v->is_array() || v->empty()) fail(key, "expected a non-empty array of rows");
  const std::size_t rows = v->size();
  const std::size_t cols = (*v)[0].is_array() ? (*v)[0].size() : 0;
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = (*v)[i];
    const std::string where = key + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != cols || cols == 0) fail(where, "rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!row[j].is_number()) fail(where + "[" + std::to_string(j) + "]", "expected a number");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }
  return out;
}

DriftField parse_drift(const Section& s, int n) {
  const std::string family = s.string("family", "constant");
  auto sized = [&](const std::string& key, const Vec& v) {
    if (v.size() != n) s.fail(key, "expected length " + std::to_string(n));
    return v;
  };
  auto square = [&](const std::string& key, const Mat& m) {
    if (m.rows() != n || m.cols() != n) {
      s.fail(key, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    return m;
  };
  const Vec zero = Vec::Zero(n);
  if (family == "constant") return DriftField::constant(sized("b", s.vector("b", zero)));
  if (family == "linear") {
    return DriftField::linear(square("A", s.matrix("A")), sized("b", s.vector("b", zero)));
  }
  if (family == "sinusoidal") {
    return DriftField::sinusoidal(sized("b", s.vector("b", zero)), sized("a", s.vector("a")),
                                  square("W", s.matrix("W")), sized("phi", s.vector("phi", zero)));
  }
  s.fail("family", "unknown drift family '" + family + "' (constant, linear, sinusoidal)");
}

const std::vector<std::string>& known_scenarios() {
  static const std::vector<std::string> names = {
      "collapse",  "double_slit",    "wep",        "concentration",
      "decompose", "residual_sweep", "trajectory", "correspondence"};
  return names;
}

CycleConfig RunConfig::cycle_config() const {
  CycleConfig c;
  c.profile = flow.profile;
  c.lambda_c = flow.lambda_c;
  c.ergodic_fraction = flow.ergodic_fraction;
  c.contraction = flow.contraction;
  c.dt = dynamics.dt;
  c.drift_factor = dynamics.drift_factor;
  c.c_max = dynamics.c_max;
  c.beta = geometry.beta;
  c.jitter = ensemble.jitter;
  c.shape = ensemble.shape;
  c.snapshot_stride = ensemble.snapshot_stride;
  return c;
}

std::string RunConfig::hash() const { return io::hex64(io::fnv1a(raw.dump())); }

RunConfig parse_config(const std::string& text, const std::string& source,
                       std::optional<std::uint64_t> seed_override) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    const std::size_t offset = ex.byte > 0 ? std::min<std::size_t>(ex.byte - 1, text.size()) : 0;
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = ex.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": " + msg);
  }
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");
  if (seed_override) doc["ensemble"]["seed"] = *seed_override;

  RunConfig cfg;
  cfg.raw = doc;
  const Section root(&cfg.raw, "");
  std::set<std::string> top = {"scenario", "output", "geometry", "flow", "dynamics", "ensemble"};
  for (const auto& s : known_scenarios()) top.insert(s);
  check_keys(root, &cfg.raw, top);

  cfg.scenario = root.string("scenario");
  const auto& known = known_scenarios();
  if (std::find(known.begin(), known.end(), cfg.scenario) == known.end()) {
    root.fail("scenario", "unknown scenario '" + cfg.scenario + "'");
  }
  cfg.output = root.string("output", "");

  const Section geo = root.child("geometry");
  check_keys(geo, cfg.raw.contains("geometry") ? &cfg.raw["geometry"] : nullptr,
             {"d", "N", "metric", "beta"});
  cfg.geometry.d = geo.integer("d", 3);
  if (cfg.geometry.d < 2) geo.fail("d", "must be at least 2");
  cfg.geometry.N = geo.integer("N", 1000);
  if (cfg.geometry.N < 1) geo.fail("N", "must be at least 1");
  const int d = cfg.geometry.d;
  if (geo.has("metric") && cfg.raw["geometry"]["metric"].is_string()) {
    const std::string name = geo.string("metric");
    if (name != "minkowski") geo.fail("metric", "unknown metric '" + name + "'");
    cfg.geometry.metric = LorentzMetric::minkowski(d);
  } else if (geo.has("metric")) {
    const Mat g = geo.matrix("metric");
    if (g.rows() != d || g.cols() != d) geo.fail("metric", "expected a d x d matrix");
    try {
      cfg.geometry.metric = LorentzMetric::constant(g);
    } catch (const Error& ex) {
      geo.fail("metric", ex.what());
    }
  } else {
    cfg.geometry.metric = LorentzMetric::minkowski(d);
  }
  cfg.geometry.beta = parse_drift(geo.child("beta"), 2 * d);

  const Section flow = root.child("flow");
  check_keys(flow, cfg.raw.contains("flow") ? &cfg.raw["flow"] : nullptr,
             {"T", "kappa", "lambda_c", "ergodic_fraction", "contraction"});
  cfg.flow.T = flow.positive("T", 1.0);
  try {
    cfg.flow.profile = parse_kappa_profile(flow.string("kappa", "smoothstep"));
  } catch (const Error& ex) {
    flow.fail("kappa", ex.what());
  }
  cfg.flow.lambda_c = flow.number("lambda_c", 0.0);
  cfg.flow.ergodic_fraction = flow.number("ergodic_fraction", 0.25);
  if (!(cfg.flow.ergodic_fraction > 0.0 && cfg.flow.ergodic_fraction < 1.0)) {
    flow.fail("ergodic_fraction", "must lie in (0, 1)");
  }
  cfg.flow.contraction = flow.boolean("contraction", true);

  const Section dyn = root.child("dynamics");
  check_keys(dyn, cfg.raw.contains("dynamics") ? &cfg.raw["dynamics"] : nullptr,
             {"dt", "drift_factor", "c_max", "L_min"});
  cfg.dynamics.dt = dyn.positive("dt", 0.01);
  cfg.dynamics.drift_factor = dyn.number("drift_factor", 2.0);
  cfg.dynamics.c_max = dyn.positive("c_max", 1.0);
  cfg.dynamics.L_min = dyn.positive("L_min", 1e-3);

  const Section ens = root.child("ensemble");
  check_keys(ens, cfg.raw.contains("ensemble") ? &cfg.raw["ensemble"] : nullptr,
             {"seed", "jitter", "jitter_shape", "spread", "distribution", "cycles", "sigma_f",
              "collapse_threshold", "snapshot_stride", "m", "M_sys"});
  cfg.ensemble.seed = ens.uint64("seed");
  cfg.ensemble.jitter = ens.number("jitter", 0.5);
  if (cfg.ensemble.jitter < 0.0) ens.fail("jitter", "must be non-negative");
  try {
    cfg.ensemble.shape = parse_jitter_shape(ens.string("jitter_shape", "uniform"));
  } catch (const Error& ex) {
    ens.fail("jitter_shape", ex.what());
  }
  try {
    cfg.ensemble.distribution = parse_initial_distribution(ens.string("distribution", "gaussian"));
  } catch (const Error& ex) {
    ens.fail("distribution", ex.what());
  }
  cfg.ensemble.spread = ens.positive("spread", 0.2);
  cfg.ensemble.cycles = ens.integer("cycles", 3);
  if (cfg.ensemble.cycles < 1) ens.fail("cycles", "must be at least 1");
  cfg.ensemble.sigma_f = ens.positive("sigma_f", 0.05);
  cfg.ensemble.collapse_threshold = ens.positive("collapse_threshold", 1.0);
  cfg.ensemble.snapshot_stride = ens.integer("snapshot_stride", 10);
  if (cfg.ensemble.snapshot_stride < 1) ens.fail("snapshot_stride", "must be at least 1");
  cfg.ensemble.m = ens.positive("m", 1.0);
  cfg.ensemble.M_sys = ens.positive("M_sys", 1000.0);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), seed_override);
}

}  // namespace hrs
