#include "shoprl/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace shoprl {

void MetricsLog::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.10g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << "\n";
  }
}

double MetricsLog::mean_head(std::size_t column, std::size_t n) const {
  n = std::min(n, rows.size());
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += rows[i][column];
  return s / static_cast<double>(n);
}

double MetricsLog::mean_tail(std::size_t column, std::size_t n) const {
  n = std::min(n, rows.size());
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = rows.size() - n; i < rows.size(); ++i) s += rows[i][column];
  return s / static_cast<double>(n);
}

}  // namespace shoprl
