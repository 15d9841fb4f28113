#include "adaptrial/design.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "adaptrial/error.hpp"

namespace adaptrial::glm {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

[[noreturn]] void bad(std::string_view text, const std::string& why) {
  throw Error(ErrorCode::InvalidArgument, "bad model term '" + std::string(text) + "': " + why);
}

std::string factor_name(const Factor& f) {
  return f.absolute ? "abs(" + f.column + ")" : f.column;
}

}  // namespace

std::string Term::name() const {
  if (factors.empty()) return "(Intercept)";
  std::string s;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (k) s += ':';
    s += factor_name(factors[k]);
  }
  return s;
}

std::string Term::key() const {
  std::vector<std::string> parts;
  for (const auto& f : factors) parts.push_back(factor_name(f));
  std::sort(parts.begin(), parts.end());
  std::string s;
  for (const auto& p : parts) s += p + ':';
  return s;
}

double Term::eval(const Table& table, std::size_t row) const {
  double v = 1.0;
  for (const auto& f : factors) {
    const double x = table.col(f.column)[row];
    v *= f.absolute ? std::fabs(x) : x;
  }
  return v;
}

Term Term::parse(std::string_view text) {
  text = trim(text);
  if (text == "1") return intercept();
  Term t;
  for (auto part : split(text, ':')) {
    Factor f;
    if (part.starts_with("abs(") && part.ends_with(")")) {
      f.absolute = true;
      part = trim(part.substr(4, part.size() - 5));
    }
    if (!is_identifier(part)) bad(text, "expected a column name");
    f.column = std::string(part);
    t.factors.push_back(std::move(f));
  }
  if (t.factors.size() > 3) bad(text, "at most three-way products are supported");
  return t;
}

bool DesignSpec::has_intercept() const {
  return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.is_intercept(); });
}

std::vector<std::string> DesignSpec::columns() const {
  std::vector<std::string> out;
  for (const auto& t : terms)
    for (const auto& f : t.factors)
      if (std::find(out.begin(), out.end(), f.column) == out.end()) out.push_back(f.column);
  return out;
}

std::vector<std::string> DesignSpec::term_names() const {
  std::vector<std::string> out;
  for (const auto& t : terms) out.push_back(t.name());
  return out;
}

bool DesignSpec::references(const std::string& column) const {
  const auto cols = columns();
  return std::find(cols.begin(), cols.end(), column) != cols.end();
}

DesignSpec DesignSpec::parse(std::string_view formula) {
  const auto tilde = formula.find('~');
  if (tilde == std::string_view::npos || formula.find('~', tilde + 1) != std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, "formula '" + std::string(formula) + "' needs exactly one '~'");
  DesignSpec spec;
  const auto lhs = trim(formula.substr(0, tilde));
  if (!is_identifier(lhs))
    throw Error(ErrorCode::InvalidArgument, "formula '" + std::string(formula) + "' has no response name");
  spec.response = std::string(lhs);

  bool intercept = true;
  std::vector<Term> rest;
  std::set<std::string> seen;
  for (auto item : split(formula.substr(tilde + 1), '+')) {
    if (item.empty())
      throw Error(ErrorCode::InvalidArgument, "formula '" + std::string(formula) + "' has an empty term");
    if (item == "0") {
      intercept = false;
      continue;
    }
    if (item == "1") continue;
    Term t = Term::parse(item);
    if (!seen.insert(t.key()).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate term '" + t.name() + "' in formula");
    rest.push_back(std::move(t));
  }
  if (intercept) spec.terms.push_back(Term::intercept());
  for (auto& t : rest) spec.terms.push_back(std::move(t));
  if (spec.terms.empty())
    throw Error(ErrorCode::InvalidArgument, "formula '" + std::string(formula) + "' has no terms");
  return spec;
}

DesignSpec DesignSpec::intercept_only(std::string response) {
  DesignSpec spec;
  spec.response = std::move(response);
  spec.terms.push_back(Term::intercept());
  return spec;
}

std::string DesignSpec::formula() const {
  std::string s = response + " ~ ";
  bool first = true;
  if (!has_intercept()) {
    s += "0";
    first = false;
  }
  for (const auto& t : terms) {
    if (!first) s += " + ";
    s += t.is_intercept() ? "1" : t.name();
    first = false;
  }
  return s;
}

Eigen::MatrixXd model_matrix(const DesignSpec& spec, const Table& table) {
  const auto n = static_cast<Eigen::Index>(table.rows());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(spec.terms.size()));
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    const auto& term = spec.terms[j];
    auto col = X.col(static_cast<Eigen::Index>(j));
    col.setOnes();
    for (const auto& f : term.factors) {
      const auto& v = table.col(f.column);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = v[static_cast<std::size_t>(i)];
        col(i) *= f.absolute ? std::fabs(x) : x;
      }
    }
  }
  return X;
}

}  // namespace adaptrial::glm
