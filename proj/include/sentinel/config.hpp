#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/engine.hpp"
#include "sentinel/forensics.hpp"
#include "sentinel/simkit.hpp"

namespace sentinel {

struct ForensicsSettings {
  std::string model_path;  // empty: train from the synthetic corpus on demand
  std::string corpus_path;
  std::uint64_t corpus_seed = 11;
  std::size_t corpus_ham = 1200;
  std::size_t corpus_spam = 800;
  std::string keywords_sensitive;  // empty: bundled lists
  std::string keywords_urgent;
  forensics::TrainConfig train;
};

struct AppConfig {
  simkit::SimConfig simulation;
  siem::DetectionConfig detection;
  ForensicsSettings forensics;
  std::string plan_library;  // empty: bundled library
  std::string output_dir = "out";
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> sweep_thetas{3, 4, 5, 6, 7};

  /// Cross-section checks on top of the per-section validators.
  void validate() const;
};

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "SENTINEL_CONFIG";

/// Parses a JSON config over the defaults. Unknown keys and out-of-range
/// values raise ConfigError naming the offending key path.
AppConfig config_from_json(std::string_view text);
AppConfig load_config(const std::string& path);
/// Model named by settings.model_path, else trained on corpus_path, else
/// trained on the seeded synthetic corpus.
forensics::PretrainedModel prepare_model(const ForensicsSettings& settings);
/// Plan library from `path`, or the bundled one when empty.
tom::PlanLibrary load_plan_library(const std::string& path);

/// Defaults as a JSON document that config_from_json accepts.
std::string default_config_json();

}  // namespace sentinel
