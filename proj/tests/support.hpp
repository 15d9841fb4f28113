#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace testing {

inline std::filesystem::path source_dir() { return ADAPTRIAL_SOURCE_DIR; }

inline nlohmann::json load_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace testing

#include "adaptrial/config.hpp"

namespace testing {

inline adaptrial::cli::ResolvedConfig load_scenario(const std::string& name) {
  const auto path = source_dir() / "configs" / name;
  return adaptrial::cli::resolve_config(adaptrial::cli::load_config_json(path), path.parent_path());
}

}  // namespace testing
