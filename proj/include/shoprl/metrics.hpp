#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace shoprl {

/// Column-named numeric rows, written as CSV. Holds no timing data so that
/// logs are reproducible.
struct MetricsLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  MetricsLog() = default;
  explicit MetricsLog(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add(std::initializer_list<double> row) { rows.emplace_back(row); }
  void write_csv(std::ostream& os) const;
  /// Mean of one column over the first (or last) n rows.
  double mean_head(std::size_t column, std::size_t n) const;
  double mean_tail(std::size_t column, std::size_t n) const;
};

}  // namespace shoprl
