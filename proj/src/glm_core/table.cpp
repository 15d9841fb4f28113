#include "adaptrial/table.hpp"

#include <algorithm>

#include "adaptrial/error.hpp"

namespace adaptrial {

void Table::set(const std::string& name, std::vector<double> values) {
  if (values.size() != rows_) {
    throw Error(ErrorCode::InvalidArgument,
                "column '" + name + "' has " + std::to_string(values.size()) +
                    " values, table has " + std::to_string(rows_) + " rows");
  }
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it != names_.end()) {
    cols_[static_cast<std::size_t>(it - names_.begin())] = std::move(values);
    return;
  }
  names_.push_back(name);
  cols_.push_back(std::move(values));
}

bool Table::has(const std::string& name) const { return find(name) != nullptr; }

const std::vector<double>* Table::find(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j)
    if (names_[j] == name) return &cols_[j];
  return nullptr;
}

const std::vector<double>& Table::col(const std::string& name) const {
  const auto* c = find(name);
  if (!c) throw Error(ErrorCode::MissingColumn, "missing column '" + name + "'");
  return *c;
}

Table Table::subset(const std::vector<std::size_t>& rows) const {
  Table out(rows.size());
  for (std::size_t j = 0; j < names_.size(); ++j) {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = cols_[j][rows[i]];
    out.names_.push_back(names_[j]);
    out.cols_.push_back(std::move(v));
  }
  return out;
}

}  // namespace adaptrial
