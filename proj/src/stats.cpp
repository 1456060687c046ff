// SPDX-License-Identifier: Apache-2.0

#include "h2mux/stats.hpp"

#include <algorithm>
#include <cmath>

namespace h2mux {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw StatError("correlation needs equal-length series");
  const size_t n = x.size();
  if (n < 2) throw StatError("correlation needs at least two points");

  double mean_x = 0, mean_y = 0, m2x = 0, m2y = 0, cov = 0;
  for (size_t i = 0; i < n; ++i) {
    const double k = 1.0 / static_cast<double>(i + 1);
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    mean_x += dx * k;
    mean_y += dy * k;
    m2x += dx * (x[i] - mean_x);
    m2y += dy * (y[i] - mean_y);
    cov += dx * (y[i] - mean_y);
  }
  if (m2x <= 0 || m2y <= 0) throw StatError("correlation undefined for zero-variance series");
  return cov / std::sqrt(m2x * m2y);
}

namespace {

// Median of the sorted range [lo, hi).
double median_sorted(const std::vector<double>& v, size_t lo, size_t hi) {
  const size_t n = hi - lo;
  const size_t mid = lo + n / 2;
  return n % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw StatError("median of empty series");
  std::sort(values.begin(), values.end());
  return median_sorted(values, 0, values.size());
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw StatError("quantile of empty series");
  if (q < 0 || q > 1) throw StatError("quantile order must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw StatError("quartiles of empty series");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  Quartiles q;
  q.min = values.front();
  q.max = values.back();
  q.median = median_sorted(values, 0, n);
  if (n == 1) {
    q.q1 = q.q3 = values[0];
    return q;
  }
  const size_t half = n / 2;
  q.q1 = median_sorted(values, 0, half);
  q.q3 = median_sorted(values, n - half, n);
  return q;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values) {
  std::vector<std::pair<double, double>> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

}  // namespace h2mux
