#pragma once

// Small statistics and cross-check utilities shared by the unit and
// acceptance suites.  Distance counters here are deliberately written from
// scratch so library regressions cannot hide behind shared code.

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace testsupport {

// O(k^2) discordant-pair count over two rank vectors.
inline int naive_kendall(const std::vector<int>& a, const std::vector<int>& b) {
  const int k = static_cast<int>(a.size());
  int d = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      d += (a[static_cast<std::size_t>(i)] < a[static_cast<std::size_t>(j)]) !=
           (b[static_cast<std::size_t>(i)] < b[static_cast<std::size_t>(j)]);
  return d;
}

inline int naive_hamming(const std::vector<int>& a, const std::vector<int>& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

inline double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double sample_sd(std::span<const double> x) {
  const double m = mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline double mse_against(std::span<const double> x, double truth) {
  double s = 0;
  for (double v : x) s += (v - truth) * (v - truth);
  return s / static_cast<double>(x.size());
}

}  // namespace testsupport
