// SPDX-License-Identifier: Apache-2.0
//
// Small statistics toolkit: product-moment correlation, order statistics
// with Tukey (median-exclusive) quartiles, and exact empirical CDFs.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace h2mux {

class StatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pearson product-moment correlation via a single Welford-style pass.
// Throws StatError when the series differ in length, have fewer than two
// points, or either has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Median of the values (averaging the middle pair for even counts).
// Throws StatError on empty input.
double median(std::vector<double> values);

// Linear-interpolation quantile of sorted-or-not values, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct Quartiles {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;

  bool operator==(const Quartiles&) const = default;
};

// Tukey hinges: q1/q3 are medians of the lower/upper half, excluding the
// overall median element when the count is odd.  Throws StatError on empty
// input.
Quartiles quartiles(std::vector<double> values);

// Exact empirical CDF: (value, P(X <= value)) at each distinct value,
// non-decreasing and ending at 1.  Empty input gives an empty list.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

}  // namespace h2mux
