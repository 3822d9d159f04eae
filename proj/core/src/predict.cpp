#include "rgarch/predict.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rgarch/errors.hpp"
#include "rgarch/link.hpp"

namespace rgarch {

namespace {

/// Spread for the compressed proposal: the fitted spread scaled by the
/// ratio of maximal distances, so the sub-model concentrates comparably.
double compressed_theta(double theta, int k, int k_free, DistanceKind kind) {
  if (kind == DistanceKind::kendall)
    return theta * (static_cast<double>(k_free) * (k_free - 1)) /
           (static_cast<double>(k) * (k - 1));
  return theta * static_cast<double>(k_free) / static_cast<double>(k);
}

}  // namespace

RankEvent::RankEvent(int k, std::vector<std::pair<int, int>> fixed)
    : k_(k), fixed_(std::move(fixed)) {
  if (k_ < 2) throw validation_error("event needs at least two items");
  if (fixed_.empty()) throw validation_error("event pins no items");
  std::sort(fixed_.begin(), fixed_.end());
  std::vector<char> item_seen(static_cast<std::size_t>(k_) + 1, 0);
  std::vector<char> rank_seen(static_cast<std::size_t>(k_) + 1, 0);
  for (const auto& [item, rank] : fixed_) {
    if (item < 1 || item > k_)
      throw validation_error("event item " + std::to_string(item) + " outside 1.." +
                             std::to_string(k_));
    if (rank < 1 || rank > k_)
      throw validation_error("event rank " + std::to_string(rank) + " outside 1.." +
                             std::to_string(k_));
    if (item_seen[static_cast<std::size_t>(item)]++)
      throw validation_error("event pins item " + std::to_string(item) + " twice");
    if (rank_seen[static_cast<std::size_t>(rank)]++)
      throw validation_error("event pins rank " + std::to_string(rank) + " twice");
  }
}

bool RankEvent::holds(const Permutation& pi) const {
  for (const auto& [item, rank] : fixed_)
    if (pi.rank_of(item) != rank) return false;
  return true;
}

PartialRanking RankEvent::as_partial() const {
  std::vector<int> entries(static_cast<std::size_t>(k_), PartialRanking::missing);
  for (const auto& [item, rank] : fixed_) entries[static_cast<std::size_t>(item - 1)] = rank;
  return PartialRanking(std::move(entries));
}

MeanForecast forecast_next(const RankingSeries& series, ModelOrder order,
                           const Coefficients& coef, DistanceKind kind) {
  order.validate();
  coef.validate();
  if (coef.order() != order)
    throw validation_error("coefficient shape does not match model order");
  if (series.size() < std::max(order.m() + 1, 2))
    throw validation_error("series too short to forecast: need max(p, q) + 1 rows");

  std::vector<int> ds = series.distance_series(kind);
  const double presample = std::accumulate(ds.begin(), ds.end(), 0.0) /
                           static_cast<double>(ds.size());
  // the appended slot's realized value is never read; only its mean is
  ds.push_back(0);
  const ConditionalMeanPath path =
      mean_path_from_distances(ds, series.k(), order, coef, kind, presample);
  const double mu = path.mu.back();
  const LinkSolve sol = theta_from_mean_clamped(mu, series.k(), kind);
  return {mu, sol.theta, sol.clamped, series.row(series.size() - 1).as_permutation()};
}

double exact_event_probability(const RankEvent& event, const MallowsSpec& spec) {
  if (event.k() != spec.k())
    throw validation_error("event and model disagree on the item count");
  const std::vector<Permutation> completions = event.as_partial().enumerate_completions();
  std::vector<double> lp;
  lp.reserve(completions.size());
  for (const Permutation& sigma : completions) lp.push_back(log_pmf(sigma, spec));
  const double shift = *std::max_element(lp.begin(), lp.end());
  if (!std::isfinite(shift)) return 0;
  double sum = 0;
  for (double v : lp) sum += std::exp(v - shift);
  return std::min(1.0, std::exp(shift + std::log(sum)));
}

const char* to_string(ProposalDensity density) {
  return density == ProposalDensity::uniform ? "uniform" : "mallows";
}

ProposalDensity proposal_density_from_string(const std::string& name) {
  if (name == "uniform") return ProposalDensity::uniform;
  if (name == "mallows") return ProposalDensity::mallows;
  throw validation_error("unknown proposal density '" + name + "' (use uniform or mallows)");
}

EventProbability is_event_probability(const RankEvent& event, const MallowsSpec& spec,
                                      int n_draws, ProposalDensity density, Rng& rng) {
  if (event.k() != spec.k())
    throw validation_error("event and model disagree on the item count");
  if (n_draws < 2) throw validation_error("need at least 2 draws for an error estimate");

  const PartialRanking partial = event.as_partial();
  const int k_free = partial.n_missing();
  if (k_free <= 1) {
    // the event leaves at most one arrangement; answer exactly
    EventProbability out;
    out.estimate = std::exp(log_pmf(partial.enumerate_completions(1).front(), spec));
    return out;
  }

  std::vector<double> logw(static_cast<std::size_t>(n_draws));
  if (density == ProposalDensity::uniform) {
    const double log_arrangements = std::lgamma(static_cast<double>(k_free) + 1.0);
    for (double& lw : logw) {
      const Permutation sigma = partial.random_completion(rng);
      lw = log_pmf(sigma, spec) + log_arrangements;
    }
  } else {
    // Free items in the mode's relative order map onto 1..k_free, so the
    // compressed mode is the identity; free ranks decompress a sub-draw
    // back into a completion.
    std::vector<int> free_items = partial.missing_items();
    std::sort(free_items.begin(), free_items.end(), [&](int a, int b) {
      return spec.mode.rank_of(a) < spec.mode.rank_of(b);
    });
    const std::vector<int> free_ranks = partial.free_ranks();

    const double theta_sub = compressed_theta(spec.theta, event.k(), k_free, spec.kind);
    const Permutation sub_mode = Permutation::identity(k_free);
    const double log_psi_sub = log_psi(theta_sub, k_free, spec.kind);
    MallowsSampler sampler(MallowsSpec(sub_mode, theta_sub, spec.kind));

    std::vector<int> entries = partial.entries();  // free slots rewritten per draw
    for (double& lw : logw) {
      const Permutation tau = sampler.draw(rng);
      for (int j = 0; j < k_free; ++j)
        entries[static_cast<std::size_t>(free_items[static_cast<std::size_t>(j)] - 1)] =
            free_ranks[static_cast<std::size_t>(tau.rank_of(j + 1) - 1)];
      const Permutation sigma(entries);
      const double log_g =
          -theta_sub * distance(tau, sub_mode, spec.kind) - log_psi_sub;
      lw = log_pmf(sigma, spec) - log_g;
    }
  }

  const double shift = *std::max_element(logw.begin(), logw.end());
  EventProbability out;
  out.n_draws = n_draws;
  if (!std::isfinite(shift)) return out;  // every weight underflowed: estimate 0

  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) w[i] = std::exp(logw[i] - shift);
  const double mean_w = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  double ss = 0;
  for (double v : w) ss += (v - mean_w) * (v - mean_w);
  const double sd_w = std::sqrt(ss / static_cast<double>(w.size() - 1));
  out.estimate = std::exp(shift) * mean_w;
  out.std_error = std::exp(shift) * sd_w / std::sqrt(static_cast<double>(w.size()));
  return out;
}

}  // namespace rgarch
