#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hrs/config.hpp"
#include "hrs/error.hpp"
#include "hrs/experiments.hpp"
#include "hrs/parallel.hpp"

using namespace hrs;
namespace fs = std::filesystem;

namespace {

fs::path config_dir() {
  const char* dir = std::getenv("HRS_CONFIG_DIR");
  return dir ? fs::path(dir) : fs::path("configs");
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

RunConfig small_collapse(bool contraction) {
  std::ostringstream os;
  os << R"({"scenario": "collapse", "geometry": {"d": 3, "N": 300},
            "flow": {"T": 1.0, "contraction": )"
     << (contraction ? "true" : "false") << R"(},
            "ensemble": {"seed": 5, "cycles": 2, "sigma_f": 0.05},
            "collapse": {"grid": {"half_width": 2.0, "spacing": 0.1}}})";
  return parse_config(os.str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Config, SyntaxErrorCarriesPosition) {
  const std::string msg = message_of("{\n  \"scenario\": \"collapse\",\n  oops\n}");
  EXPECT_NE(msg.find("cfg.json:3:"), std::string::npos) << msg;
}

TEST(Config, MissingSeedNamesField) {
  const std::string msg = message_of(R"({"scenario": "collapse", "ensemble": {}})");
  EXPECT_NE(msg.find("ensemble.seed"), std::string::npos) << msg;
}

TEST(Config, UnknownScenarioAndFieldRejected) {
  EXPECT_NE(message_of(R"({"scenario": "teleport", "ensemble": {"seed": 1}})").find("teleport"),
            std::string::npos);
  const std::string msg =
      message_of(R"({"scenario": "collapse", "ensemble": {"seed": 1, "sedd": 2}})");
  EXPECT_NE(msg.find("unknown field"), std::string::npos) << msg;
  EXPECT_NE(msg.find("sedd"), std::string::npos) << msg;
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_FALSE(message_of(R"({"scenario": "collapse", "ensemble": {"seed": 1},
                              "dynamics": {"dt": -1}})")
                   .empty());
  EXPECT_FALSE(message_of(R"({"scenario": "collapse", "ensemble": {"seed": 1},
                              "flow": {"kappa": "tanh"}})")
                   .empty());
}

TEST(Config, SeedOverrideChangesHash) {
  const std::string text = R"({"scenario": "collapse", "ensemble": {"seed": 1}})";
  const auto a = parse_config(text);
  const auto b = parse_config(text);
  const auto c = parse_config(text, "<config>", 2);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(c.ensemble.seed, 2u);
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Config, ShippedConfigsLoad) {
  for (const auto& name : known_scenarios()) {
    const auto cfg = load_config(config_dir() / (name + ".json"));
    EXPECT_EQ(cfg.scenario, name);
  }
  EXPECT_THROW(load_config(config_dir() / "missing.json"), ConfigError);
}

TEST(Collapse, EventsFollowContraction) {
  const auto on = run_collapse(small_collapse(true));
  EXPECT_EQ(on.collapse_events, 2);
  for (const auto& m : on.metrics) EXPECT_LT(m.contraction_ratio, 0.01);
  for (const auto& r : on.records) EXPECT_LT(r.metastable_residual, 1e-9);
  const auto off = run_collapse(small_collapse(false));
  EXPECT_EQ(off.collapse_events, 0);
}

TEST(DoubleSlit, DominantPeriodOfSyntheticSignal) {
  std::vector<double> y, s;
  for (int i = 0; i < 400; ++i) {
    y.push_back(0.05 * i);
    s.push_back(2.0 + std::cos(2.0 * std::numbers::pi * y.back() / 1.3));
  }
  EXPECT_NEAR(dominant_period(y, s, 0.5, 4.0), 1.3, 0.01);
}

TEST(DoubleSlit, ClosedSlitHasNoVisibility) {
  DoubleSlitParams p;
  p.per_slit = 2000;
  p.closed = "a";
  p.seed = 3;
  const auto r = run_double_slit(p);
  EXPECT_EQ(r.visibility, 0.0);
  EXPECT_NEAR(r.psi.norm(), 1.0, 1e-12);
}

TEST(DoubleSlit, FringesAndSymmetricMidline) {
  DoubleSlitParams p;
  p.per_slit = 4000;
  p.seed = 4;
  const auto r = run_double_slit(p);
  EXPECT_NEAR(r.fringe_measured / r.fringe_expected, 1.0, 0.1);
  EXPECT_GT(r.visibility, 0.5);
  EXPECT_LT(r.born_a.max_cell_error, 1e-12);
  EXPECT_LT(r.born_b.norm_error, 1e-12);
  p.phase = SlitPhase::constant;
  const auto c = run_double_slit(p);
  EXPECT_LT(std::abs(c.midline_ratio - 1.0), c.midline_tolerance);
}

TEST(DoubleSlit, GeometryChecked) {
  DoubleSlitParams p;
  p.slit_width = 3.0;
  EXPECT_THROW(run_double_slit(p), GeometryError);
}

TEST(Wep, IdenticalSystemsDoNotDeviate) {
  WepParams p;
  p.N = 101;
  p.steps = 3;
  p.cycle.dt = 0.05;
  p.a.seed = 9;
  p.b = p.a;
  const auto r = run_wep(p);
  EXPECT_EQ(r.max_deviation, 0.0);
  EXPECT_TRUE(r.within_envelope);
  EXPECT_EQ(r.deviation.size(), 4u);  // initial state plus three steps
  EXPECT_NEAR(r.envelope, 5.0 / std::sqrt(101.0), 1e-15);
}

TEST(Wep, RelabelingSystemsIsSymmetric) {
  WepParams p;
  p.N = 101;
  p.steps = 3;
  p.cycle.dt = 0.05;
  p.a.seed = 1;
  p.b.seed = 2;
  p.b.shape = JitterShape::triangular;
  const auto r1 = run_wep(p);
  std::swap(p.a, p.b);
  const auto r2 = run_wep(p);
  EXPECT_EQ(r1.deviation, r2.deviation);
  EXPECT_GT(r1.max_deviation, 0.0);
}

TEST(Decompose, AlphaSweepStartsAtTwo) {
  const auto t = alpha_sweep_table();
  ASSERT_GE(t.size(), 4u);
  EXPECT_EQ(std::get<std::string>(t.rows()[0][0]), "planck");
}

TEST(Scenario, ArtifactsIndependentOfThreads) {
  const auto cfg = small_collapse(true);
  const fs::path root = fs::temp_directory_path() / "hrs_test_threads";
  fs::remove_all(root);
  const unsigned saved = worker_threads();
  set_worker_threads(1);
  const auto m1 = run_scenario(cfg, {root / "one", io::TableFormat::csv});
  set_worker_threads(3);
  const auto m3 = run_scenario(cfg, {root / "three", io::TableFormat::csv});
  set_worker_threads(saved);
  ASSERT_EQ(m1.outputs.size(), m3.outputs.size());
  EXPECT_EQ(m1.doc.dump(), m3.doc.dump());
  for (std::size_t i = 0; i < m1.outputs.size(); ++i) {
    EXPECT_EQ(slurp(m1.outputs[i]), slurp(m3.outputs[i])) << m1.outputs[i];
  }
  EXPECT_TRUE(fs::exists(root / "one" / "manifest.json"));
  fs::remove_all(root);
}
