// Brute-force tabulation of Mallows distributions.  Kept free of any code
// shared with the closed-form moment or sampling paths so it can serve as an
// independent cross-check in tests.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgarch/errors.hpp"
#include "rgarch/mallows.hpp"

namespace rgarch {

namespace {

// O(k^2) pair scan, deliberately not the merge-sort implementation.
int naive_kendall(const std::vector<int>& a, const std::vector<int>& b) {
  const int k = static_cast<int>(a.size());
  int d = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const bool a_disc = a[static_cast<std::size_t>(i)] < a[static_cast<std::size_t>(j)];
      const bool b_disc = b[static_cast<std::size_t>(i)] < b[static_cast<std::size_t>(j)];
      d += a_disc != b_disc;
    }
  return d;
}

int naive_hamming(const std::vector<int>& a, const std::vector<int>& b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

ExactMallowsTable enumerate_mallows(int k, double theta, DistanceKind kind) {
  if (k < 1 || k > 8) throw validation_error("enumeration supports 1 <= k <= 8");
  if (!(theta > 0)) throw validation_error("theta must be positive");

  std::vector<int> ranks(static_cast<std::size_t>(k));
  std::iota(ranks.begin(), ranks.end(), 1);
  const std::vector<int> mode = ranks;

  ExactMallowsTable table;
  std::vector<double> weights;
  std::vector<int> dists;
  do {
    const int d = kind == DistanceKind::kendall ? naive_kendall(ranks, mode)
                                                : naive_hamming(ranks, mode);
    dists.push_back(d);
    weights.push_back(std::exp(-theta * d));
    table.support.push_back(Permutation(ranks));
  } while (std::next_permutation(ranks.begin(), ranks.end()));

  const double psi = std::accumulate(weights.begin(), weights.end(), 0.0);
  double mean = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    mean += dists[i] * weights[i] / psi;
  double var = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double c = dists[i] - mean;
    var += c * c * weights[i] / psi;
  }

  table.psi = psi;
  table.mean = mean;
  table.variance = var;
  table.pmf.resize(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) table.pmf[i] = weights[i] / psi;
  return table;
}

}  // namespace rgarch
