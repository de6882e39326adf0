#include "harmgrad/config.hpp"

#include <cmath>
#include <fstream>

namespace harmgrad {

nlohmann::json Constants::to_json() const {
  return {{"c", c},         {"C", C},           {"t", t},           {"c_epsilon", c_epsilon},
          {"eta", eta},     {"mu_max", mu_max}, {"cartan", cartan}, {"drift_area", drift_area}};
}

ParamReader::ParamReader(const nlohmann::json& j, std::string where)
    : obj_(j), where_(std::move(where)) {
  if (!obj_.is_object()) throw Error(ErrorKind::ConfigInvalid, where_ + " must be an object");
}

void ParamReader::fail(const std::string& key, const std::string& why) const {
  throw Error(ErrorKind::ConfigInvalid, where_ + "." + key + ": " + why);
}

double ParamReader::positive(const std::string& key, double fallback) {
  const double v = get<double>(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be positive and finite");
  return v;
}

int ParamReader::count(const std::string& key, int fallback, int min) {
  const int v = get<int>(key, fallback);
  if (v < min) fail(key, "must be at least " + std::to_string(min));
  return v;
}

std::vector<double> ParamReader::positive_list(const std::string& key, std::vector<double> fallback) {
  auto v = get<std::vector<double>>(key, std::move(fallback));
  if (v.empty()) fail(key, "must not be empty");
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) fail(key, "entries must be positive and finite");
  }
  return v;
}

std::vector<int> ParamReader::count_list(const std::string& key, std::vector<int> fallback, int min) {
  auto v = get<std::vector<int>>(key, std::move(fallback));
  if (v.empty()) fail(key, "must not be empty");
  for (int x : v) {
    if (x < min) fail(key, "entries must be at least " + std::to_string(min));
  }
  return v;
}

void ParamReader::finish() const {
  for (const auto& [key, value] : obj_.items()) {
    if (!seen_.contains(key)) throw Error(ErrorKind::ConfigInvalid, where_ + ": unknown key '" + key + "'");
  }
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw Error(ErrorKind::ConfigInvalid, "format must be csv or json, got '" + s + "'");
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  ParamReader top(j, "config");
  ExperimentConfig cfg;
  cfg.experiment = top.get<std::string>("experiment", "");
  if (cfg.experiment.empty()) top.fail("experiment", "required");
  cfg.seed = top.get<std::uint64_t>("seed", cfg.seed);
  cfg.jobs = static_cast<unsigned>(top.count("jobs", 0, 0));
  cfg.output_dir = top.get<std::string>("output_dir", cfg.output_dir.string());
  cfg.format = parse_format(top.get<std::string>("format", "csv"));
  cfg.params = top.get<nlohmann::json>("params", nlohmann::json::object());
  if (!cfg.params.is_object()) top.fail("params", "must be an object");

  const auto constants = top.get<nlohmann::json>("constants", nlohmann::json::object());
  ParamReader k(constants, "constants");
  Constants& c = cfg.constants;
  c.c = k.positive("c", c.c);
  c.C = k.positive("C", c.C);
  c.t = k.positive("t", c.t);
  c.c_epsilon = k.positive("c_epsilon", c.c_epsilon);
  c.eta = k.positive("eta", c.eta);
  c.mu_max = k.positive("mu_max", c.mu_max);
  if (c.mu_max >= 1.0) k.fail("mu_max", "must lie in (0, 1)");
  c.cartan = k.positive("cartan", c.cartan);
  c.drift_area = k.positive("drift_area", c.drift_area);
  k.finish();
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace harmgrad
