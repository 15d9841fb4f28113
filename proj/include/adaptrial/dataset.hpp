#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "adaptrial/interim.hpp"

namespace adaptrial::cli {

struct Dataset {
  std::vector<std::string> covariate_names;
  std::vector<interim::PatientRecord> patients;
  bool has_short_term = true;
};

// CSV with header: id, arm, y, optional x and arrival_day, remaining columns are
// numeric covariates. "NA" (or empty) marks a missing x or y. Throws
// Error(SchemaViolation) citing the row id.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

// Splits one CSV line (no quoting beyond plain double quotes).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace adaptrial::cli
