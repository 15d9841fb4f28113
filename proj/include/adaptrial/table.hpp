#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace adaptrial {

// Column-major table of named real columns.
class Table {
 public:
  Table() = default;
  explicit Table(std::size_t rows) : rows_(rows) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  // Adds (or replaces) a column; its length must equal rows().
  void set(const std::string& name, std::vector<double> values);
  bool has(const std::string& name) const;
  // Throws Error(MissingColumn) when absent.
  const std::vector<double>& col(const std::string& name) const;
  const std::vector<double>* find(const std::string& name) const;

  Table subset(const std::vector<std::size_t>& rows) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
};

}  // namespace adaptrial
