#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "rffcap/harness.hpp"

namespace rffcap {

/// Parsed configuration file. See README.md for the schema.
struct AppConfig {
  ScenarioConfig scenario;
  std::optional<SweepSpec> sweep;
  bool sweep_with_classifier = false;
  /// Class count for the `classify` command; 0 means n_train_devices.
  int classify_n_classes = 0;
};

/// Unknown sections or keys are rejected so typos do not pass silently.
AppConfig parse_config(const nlohmann::json& doc);
AppConfig load_config(const std::string& path);

nlohmann::json to_json(const SweepResult& result);
nlohmann::json to_json(const std::vector<BoundVerdict>& verdicts);

}  // namespace rffcap
