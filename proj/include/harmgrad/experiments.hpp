#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "harmgrad/config.hpp"

namespace harmgrad {

using Cell = std::variant<double, long long, std::string>;

/// Rows are stored as formatted text (%.12g for doubles) so writers are
/// byte-stable.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<Cell>& row);
  void write_csv(std::ostream& os) const;
  nlohmann::json to_json() const;
};

std::string format_cell(const Cell& c);

struct Check {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  // how measured is compared with threshold, e.g. "<=", ">="
  std::string detail;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<Table> tables;  // tables[0] is the main table
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();

  bool passed() const;
  nlohmann::json to_json() const;
};

struct RunContext {
  std::uint64_t seed = 1;
  unsigned jobs = 0;
  Constants constants;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::string verifies;
  std::vector<int> criteria;  // acceptance criteria covered
};

/// Every named experiment except "all".
const std::vector<ExperimentInfo>& experiment_catalog();
nlohmann::json catalog_json();

using PreparedRun = std::function<ExperimentReport()>;

/// Validates params (ErrorKind::ConfigInvalid) and returns the deferred run.
PreparedRun prepare_experiment(const std::string& name, const nlohmann::json& params,
                               const RunContext& ctx);

ExperimentReport run_experiment(const std::string& name, const nlohmann::json& params = nlohmann::json::object(),
                                const RunContext& ctx = {});

/// Expands "all" into every catalog entry, each reading params[name].
std::vector<std::pair<std::string, PreparedRun>> prepare_config(const ExperimentConfig& cfg);

/// <dir>/<experiment>.csv for the main table, <dir>/<experiment>_<table>.csv
/// for the others and <dir>/<experiment>_summary.json. With OutputFormat::Json
/// tables go to .json files instead.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir, OutputFormat format,
                  const nlohmann::json& run_info);

/// Uniform doubles in [0, 1) from the top 53 bits of a 64-bit Mersenne Twister.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi);
  int integer(int lo, int hi);  // inclusive
  double normal();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Least squares y = intercept + slope x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace harmgrad
