#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adaptrial/config.hpp"
#include "adaptrial/dataset.hpp"

namespace adaptrial::cli {

enum ExitCode { kOk = 0, kInputError = 2, kEstimationError = 3, kFailureBudget = 4 };

// Interim analysis of an observed dataset; adds the sample size reassessment
// block when with_ssr is set.
nlohmann::json interim_report(const Dataset& data, const ResolvedConfig& cfg, bool with_ssr);

nlohmann::json characteristics_json(const sim::OperatingCharacteristics& oc);
std::string replications_csv(const std::vector<sim::ReplicationRecord>& records);
std::string plot_csv(const std::vector<sim::PlotRow>& rows);
std::string summary_table(const sim::OperatingCharacteristics& oc, const std::string& method);

// Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adaptrial::cli
