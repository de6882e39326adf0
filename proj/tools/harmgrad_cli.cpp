#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "harmgrad/config.hpp"
#include "harmgrad/experiments.hpp"
#include "harmgrad/parallel.hpp"

using namespace harmgrad;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitConfigInvalid = 2;
constexpr int kExitRuntime = 3;

void print_catalog(bool as_json) {
  if (as_json) {
    std::cout << catalog_json().dump(2) << '\n';
    return;
  }
  for (const ExperimentInfo& i : experiment_catalog()) {
    std::cout << i.name << "\n  " << i.description << "\n  verifies: " << i.verifies << '\n';
  }
  std::cout << "all\n  Every experiment above, params keyed by experiment name\n";
}

int run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out_dir,
        std::optional<unsigned> jobs, std::optional<std::string> format) {
  ExperimentConfig cfg;
  std::vector<std::pair<std::string, PreparedRun>> runs;
  try {
    cfg = load_config(path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (jobs) cfg.jobs = *jobs;
    if (format) cfg.format = parse_format(*format);
    runs = prepare_config(cfg);
  } catch (const Error& e) {
    std::cerr << "harmgrad: " << e.what() << '\n';
    return kExitConfigInvalid;
  }

  default_jobs().store(cfg.jobs);
  bool all_pass = true;
  nlohmann::json overall = nlohmann::json::array();
  try {
    for (auto& [name, prepared] : runs) {
      const auto start = std::chrono::steady_clock::now();
      const ExperimentReport report = prepared();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const nlohmann::json info = {{"experiment", name},
                                   {"seed", cfg.seed},
                                   {"constants", cfg.constants.to_json()},
                                   {"params", cfg.experiment == "all" ? cfg.params.value(name, nlohmann::json::object())
                                                                      : cfg.params}};
      write_report(report, cfg.output_dir, cfg.format, info);
      for (const Check& c : report.checks) {
        std::printf("%-18s %-28s %s  measured %.6g %s %.6g\n", name.c_str(), c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.measured, c.relation.c_str(), c.threshold);
      }
      std::fprintf(stderr, "%s finished in %.2f s\n", name.c_str(), secs);
      all_pass = all_pass && report.passed();
      overall.push_back({{"experiment", name}, {"pass", report.passed()}});
    }
  } catch (const std::exception& e) {
    std::cerr << "harmgrad: " << e.what() << '\n';
    return kExitRuntime;
  }
  if (cfg.experiment == "all") {
    std::ofstream os(cfg.output_dir / "summary.json", std::ios::binary);
    os << nlohmann::json{{"pass", all_pass}, {"seed", cfg.seed}, {"experiments", overall}}.dump(2) << '\n';
  }
  return all_pass ? 0 : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on frequency superlevel sets of planar harmonic gradients"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List the named experiments");
  bool as_json = false;
  list->add_flag("--json", as_json, "Print the catalog as JSON");

  auto* run_cmd = app.add_subcommand("run", "Run the experiment named in a JSON config");
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> jobs;
  std::optional<std::string> format;
  run_cmd->add_option("config", config, "Path to the JSON config")->required();
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out-dir", out_dir, "Override the output directory");
  run_cmd->add_option("--jobs", jobs, "Worker threads, 0 for all cores");
  run_cmd->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitConfigInvalid;
  }

  if (list->parsed()) {
    print_catalog(as_json);
    return 0;
  }
  return run(config, seed, out_dir, jobs, format);
}
