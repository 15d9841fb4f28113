#include "adaptrial/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "adaptrial/error.hpp"

namespace adaptrial::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_na(const std::string& s) { return s.empty() || s == "NA"; }

[[noreturn]] void violation(const std::string& msg) { throw Error(ErrorCode::SchemaViolation, msg); }

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) violation(what + ": '" + s + "' is not a number");
  return v;
}

int parse_binary(const std::string& s, const std::string& what) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  violation(what + ": expected 0 or 1, got '" + s + "'");
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else cur += c;
  }
  out.push_back(trim(cur));
  return out;
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) violation("dataset is empty (header row required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  auto index_of = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int i_id = index_of("id"), i_arm = index_of("arm"), i_y = index_of("y"), i_x = index_of("x"),
            i_day = index_of("arrival_day");
  if (i_id < 0) violation("dataset header lacks the 'id' column");
  if (i_arm < 0) violation("dataset header lacks the 'arm' column");
  if (i_y < 0) violation("dataset header lacks the 'y' column");

  Dataset ds;
  ds.has_short_term = i_x >= 0;
  std::vector<int> cov_idx;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& h = header[j];
    if (h == "id" || h == "arm" || h == "y" || h == "x" || h == "arrival_day") continue;
    if (h.empty()) violation("dataset header has an empty column name");
    if (h == "a") violation("column name 'a' is reserved for the arm indicator");
    if (std::find(ds.covariate_names.begin(), ds.covariate_names.end(), h) != ds.covariate_names.end())
      violation("duplicate column '" + h + "'");
    ds.covariate_names.push_back(h);
    cov_idx.push_back(static_cast<int>(j));
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      violation("line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields, expected " +
                std::to_string(header.size()));
    interim::PatientRecord p;
    p.id = f[static_cast<std::size_t>(i_id)];
    const std::string where = "row '" + p.id + "'";
    p.arm = parse_binary(f[static_cast<std::size_t>(i_arm)], where + " arm");
    const auto& ys = f[static_cast<std::size_t>(i_y)];
    if (!is_na(ys)) p.y = parse_binary(ys, where + " y");
    if (i_x >= 0) {
      const auto& xs = f[static_cast<std::size_t>(i_x)];
      if (!is_na(xs)) p.x = parse_binary(xs, where + " x");
      if (p.y && !p.x) violation(where + ": y is observed but x is missing");
    }
    if (i_day >= 0) {
      const auto& ds_ = f[static_cast<std::size_t>(i_day)];
      if (!is_na(ds_)) p.arrival = parse_number(ds_, where + " arrival_day");
    }
    for (std::size_t k = 0; k < cov_idx.size(); ++k) {
      const auto& v = f[static_cast<std::size_t>(cov_idx[k])];
      if (is_na(v)) violation(where + ": covariate '" + ds.covariate_names[k] + "' is missing");
      p.z.push_back(parse_number(v, where + " " + ds.covariate_names[k]));
    }
    ds.patients.push_back(std::move(p));
  }
  if (ds.patients.empty()) violation("dataset has no rows");
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SchemaViolation, "cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

}  // namespace adaptrial::cli
