#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hrs/config.hpp"
#include "hrs/error.hpp"
#include "hrs/experiments.hpp"
#include "hrs/parallel.hpp"

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
  std::string format = "csv";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Override ensemble.seed");
  app->add_option("--out", c.out, "Output directory");
  app->add_option("--threads", c.threads, "Worker threads (speed only)");
  app->add_option("--format", c.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
}

int execute(hrs::RunConfig cfg, const Common& c) {
  if (c.threads > 0) hrs::set_worker_threads(c.threads);
  hrs::RunOptions opts;
  opts.format = hrs::io::parse_table_format(c.format);
  if (!c.out.empty()) opts.out = c.out;
  else if (!cfg.output.empty()) opts.out = cfg.output;
  else opts.out = std::filesystem::path("results") / cfg.scenario;
  const hrs::Manifest m = hrs::run_scenario(cfg, opts);
  std::cout << cfg.scenario << ": " << m.outputs.size() << " artifacts in " << opts.out.string()
            << " (config " << cfg.hash() << ")\n";
  return 0;
}

hrs::RunConfig load_as(const std::string& path, const std::string& scenario, const Common& c) {
  hrs::RunConfig cfg = hrs::load_config(path, c.seed);
  if (!scenario.empty() && cfg.scenario != scenario) {
    hrs::json raw = cfg.raw;
    raw["scenario"] = scenario;
    cfg = hrs::parse_config(raw.dump(), path);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamilton-Randers ensemble simulator"};
  app.require_subcommand(1);

  Common common;
  std::string config_path;

  auto* run = app.add_subcommand("run", "Run the scenario named in a config file");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  add_common(run, common);

  struct Named {
    const char* command;
    const char* scenario;
    const char* help;
  };
  const Named named[] = {
      {"double-slit", "double_slit", "Double-slit superposition and two-time run"},
      {"wep", "wep", "Weak-equivalence median comparison"},
      {"collapse", "collapse", "Fundamental cycles with collapse detection"},
      {"decompose", "decompose", "Lipschitz/matter decomposition and alpha sweep"},
  };
  std::vector<std::pair<CLI::App*, std::string>> scenario_cmds;
  for (const auto& n : named) {
    auto* sub = app.add_subcommand(n.command, n.help);
    sub->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    add_common(sub, common);
    scenario_cmds.emplace_back(sub, n.scenario);
  }

  auto* conc = app.add_subcommand("concentration-suite", "Sphere and Gaussian concentration");
  conc->add_option("config", config_path, "Optional config file")->check(CLI::ExistingFile);
  add_common(conc, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(load_as(config_path, "", common), common);
    for (const auto& [sub, scenario] : scenario_cmds) {
      if (*sub) return execute(load_as(config_path, scenario, common), common);
    }
    if (*conc) {
      if (!config_path.empty()) return execute(load_as(config_path, "concentration", common), common);
      hrs::json doc = {{"scenario", "concentration"},
                       {"ensemble", {{"seed", common.seed.value_or(1)}}}};
      return execute(hrs::parse_config(doc.dump(), "<concentration-suite>"), common);
    }
  } catch (const hrs::Error& ex) {
    std::cerr << "hrsim: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "hrsim: unexpected failure: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
