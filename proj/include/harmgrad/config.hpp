#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmgrad/error.hpp"

namespace harmgrad {

/// Constants the theory leaves unnamed. Every experiment reads them from here.
struct Constants {
  double c = 0.05;          // small-scale frequency radius c / budget
  double C = 10.0;          // quasi-subadditivity factor
  double t = 5.0;           // quasi-subadditivity radius
  double c_epsilon = 1.0;   // drift small-scale radius c_eps / budget^{1+eps}
  double eta = 0.2;         // largest Beltrami radius
  double mu_max = 0.5;      // Neumann series guard on sup |mu|
  double cartan = 16.0;     // covering constant
  double drift_area = 4.0;  // bound on area / (Lambda^{2+eps} r^2)

  nlohmann::json to_json() const;
};

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  unsigned jobs = 0;
  std::filesystem::path output_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  Constants constants;
  /// Experiment parameters; under "all", an object keyed by experiment name.
  nlohmann::json params = nlohmann::json::object();
};

/// Throws ErrorKind::ConfigInvalid on unknown keys, wrong types or bad values.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

OutputFormat parse_format(const std::string& s);

/// Typed access to a JSON object that remembers which keys were read, so
/// finish() can reject the rest.
class ParamReader {
 public:
  ParamReader(const nlohmann::json& j, std::string where);

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!obj_.contains(key)) return fallback;
    try {
      return obj_.at(key).template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::ConfigInvalid, where_ + "." + key + ": " + e.what());
    }
  }

  double positive(const std::string& key, double fallback);
  int count(const std::string& key, int fallback, int min = 1);
  std::vector<double> positive_list(const std::string& key, std::vector<double> fallback);
  std::vector<int> count_list(const std::string& key, std::vector<int> fallback, int min = 1);

  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
  void finish() const;

 private:
  const nlohmann::json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace harmgrad
