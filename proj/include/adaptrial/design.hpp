#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adaptrial/table.hpp"

namespace adaptrial::glm {

struct Factor {
  std::string column;
  bool absolute = false;

  bool operator==(const Factor&) const = default;
};

// A product of factors; the empty product is the intercept.
struct Term {
  std::vector<Factor> factors;

  bool is_intercept() const { return factors.empty(); }
  bool is_interaction() const { return factors.size() > 1; }
  std::string name() const;
  // Canonical form used for duplicate detection (factor order ignored).
  std::string key() const;

  double eval(const Table& table, std::size_t row) const;

  static Term intercept() { return {}; }
  // Parses "z1", "abs(z1)", "z1:z2", "a:abs(z1):z2" or "1".
  static Term parse(std::string_view text);
};

struct DesignSpec {
  std::string response = "y";
  std::vector<Term> terms;

  bool has_intercept() const;
  std::vector<std::string> columns() const;
  std::vector<std::string> term_names() const;
  bool references(const std::string& column) const;

  // "y ~ x + z1 + z1:z2 + abs(z1)"; "y ~ 1" is intercept-only and a leading
  // "0 +" suppresses the intercept. Throws Error(InvalidArgument).
  static DesignSpec parse(std::string_view formula);
  static DesignSpec intercept_only(std::string response = "y");
  std::string formula() const;
};

// Rows x terms model matrix; throws Error(MissingColumn).
Eigen::MatrixXd model_matrix(const DesignSpec& spec, const Table& table);

}  // namespace adaptrial::glm
