#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptrial/trial_sim.hpp"

namespace adaptrial::cli {

// Reads a TOML (or .json) config into JSON. Parse errors carry line and column.
nlohmann::json load_config_json(const std::filesystem::path& path);

struct DatasetShape {
  std::vector<std::string> covariate_names;
  bool has_short_term = true;
};

struct ResolvedConfig {
  sim::ScenarioConfig scenario;
  long reps = 1000;
  std::vector<double> sweep_scales;
  std::vector<interim::Method> sweep_methods;
  // Pooled working models for the blinded fraction.
  glm::DesignSpec h_pooled, f_pooled;
  // Every field with defaults applied; loadable as a JSON config.
  nlohmann::json resolved;
};

// Validates field names and types and applies defaults. With `data`, the
// covariate source and generative models are not required (analysis mode).
// Throws Error(BadConfig) naming the offending field.
ResolvedConfig resolve_config(const nlohmann::json& raw, const std::filesystem::path& base_dir,
                              const std::optional<DatasetShape>& data = std::nullopt);

// Covariate CSV with an id column (dropped) and numeric columns.
Table read_covariate_table(const std::filesystem::path& path);

}  // namespace adaptrial::cli
