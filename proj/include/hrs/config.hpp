#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrs/ensemble.hpp"
#include "hrs/flow.hpp"
#include "hrs/geometry.hpp"

namespace hrs {

using json = nlohmann::json;

// Typed access to a JSON object with dotted field paths in error messages.
class Section {
 public:
  Section(const json* node, std::string path);

  const std::string& path() const { return path_; }
  bool has(const std::string& key) const;
  Section child(const std::string& key) const;  // missing child -> empty section

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const;
  std::uint64_t uint64(const std::string& key) const;
  bool boolean(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  Vec vector(const std::string& key, std::optional<Vec> fallback = std::nullopt) const;
  Mat matrix(const std::string& key, std::optional<Mat> fallback = std::nullopt) const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const json* lookup(const std::string& key) const;
  const json* node_;
  std::string path_;
};

struct GeometryBlock {
  int d = 3;
  int N = 1000;
  LorentzMetric metric = LorentzMetric::minkowski(3);
  DriftField beta = DriftField::constant(Vec::Zero(6));  // per molecule, length 2d
};

struct FlowBlock {
  double T = 1.0;
  KappaProfile profile = KappaProfile::smoothstep;
  double lambda_c = 0.0;
  double ergodic_fraction = 0.25;
  bool contraction = true;
};

struct DynamicsBlock {
  double dt = 0.01;
  double drift_factor = 2.0;
  double c_max = 1.0;
  double L_min = 1e-3;
};

struct EnsembleBlock {
  std::uint64_t seed = 0;
  double jitter = 0.5;
  JitterShape shape = JitterShape::uniform;
  double spread = 0.2;
  InitialDistribution distribution = InitialDistribution::gaussian;
  int cycles = 3;
  double sigma_f = 0.05;
  double collapse_threshold = 1.0;
  int snapshot_stride = 10;
  double m = 1.0;
  double M_sys = 1000.0;
};

struct RunConfig {
  std::string scenario;
  GeometryBlock geometry;
  FlowBlock flow;
  DynamicsBlock dynamics;
  EnsembleBlock ensemble;
  std::string output;
  json raw;  // effective document, including overrides

  Section section(const std::string& key) const { return Section(&raw, "").child(key); }
  CycleConfig cycle_config() const;
  std::string hash() const;  // FNV-1a of the canonical effective document
};

// Throws ConfigError with "<source>:<line>:<column>" for syntax errors and
// the dotted field path for validation errors.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>",
                       std::optional<std::uint64_t> seed_override = std::nullopt);
RunConfig load_config(const std::filesystem::path& path,
                      std::optional<std::uint64_t> seed_override = std::nullopt);

DriftField parse_drift(const Section& s, int n);

const std::vector<std::string>& known_scenarios();

}  // namespace hrs
