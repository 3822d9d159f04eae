#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rgarch/mallows.hpp"
#include "rgarch/permutation.hpp"
#include "rgarch/process.hpp"
#include "rgarch/rng.hpp"

namespace rgarch {

/// An event on the next ranking: a set of items pinned to specific ranks.
/// The probability of interest is P(pi(item) = rank for every pair).
class RankEvent {
 public:
  /// `fixed` holds (item, rank) pairs, both 1-based; items and ranks must
  /// each be distinct and in 1..k.
  RankEvent(int k, std::vector<std::pair<int, int>> fixed);

  int k() const { return k_; }
  /// Pairs sorted by item.
  const std::vector<std::pair<int, int>>& fixed() const { return fixed_; }
  int n_free() const { return k_ - static_cast<int>(fixed_.size()); }

  bool holds(const Permutation& pi) const;

  /// The event as a partially observed ranking: pinned entries observed,
  /// everything else missing.
  PartialRanking as_partial() const;

 private:
  int k_;
  std::vector<std::pair<int, int>> fixed_;
};

/// One-step-ahead location of the conditional mean recursion, together with
/// the matching spread.  The predictive law for the next ranking is
/// Mallows(mode, theta) with `mode` the last observed ranking.
struct MeanForecast {
  double mu = 0;
  double theta = 0;
  /// The mean landed outside the open admissible interval and was clamped.
  bool clamped = false;
  Permutation mode;
};

/// Runs the fitted mean recursion one step past the end of a fully observed
/// series.  Requires at least max(p, q) + 1 rows and two rows overall;
/// feedback lags reaching before the first computable term use the sample
/// mean of the observed distances, exactly as in fitting.
MeanForecast forecast_next(const RankingSeries& series, ModelOrder order,
                           const Coefficients& coef, DistanceKind kind);

/// Exact event probability by enumerating every arrangement of the free
/// ranks; feasible while the event leaves at most 8 items free.
double exact_event_probability(const RankEvent& event, const MallowsSpec& spec);

/// How importance-sampling draws are proposed.
enum class ProposalDensity {
  /// Uniform over the arrangements of the free ranks.
  uniform,
  /// A Mallows model on the free sub-ranking, centered on the mode's
  /// relative order with the spread rescaled to the smaller space.
  mallows,
};

ProposalDensity proposal_density_from_string(const std::string& name);
const char* to_string(ProposalDensity density);

struct EventProbability {
  double estimate = 0;
  /// Monte Carlo standard error treating draws as independent.  Exact for
  /// the uniform proposal and for Kendall; Hamming Mallows proposals come
  /// from a thinned Metropolis chain, so neighboring draws retain a little
  /// correlation and the error bar is approximate.
  double std_error = 0;
  /// Draws actually consumed; 0 when the event pinned the ranking down to
  /// at most one free item and the answer is exact.
  int n_draws = 0;
};

/// Importance-sampling estimate of the event probability under the given
/// predictive law.  Every proposal draw satisfies the event by construction;
/// weights are accumulated in log space.
EventProbability is_event_probability(const RankEvent& event, const MallowsSpec& spec,
                                      int n_draws, ProposalDensity density, Rng& rng);

}  // namespace rgarch
