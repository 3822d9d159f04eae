#include "rgarch/mcem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "fit_detail.hpp"
#include "rgarch/errors.hpp"

namespace rgarch {

namespace {

// Acceptance tolerates this much residual mean gain even at zero measured
// noise, so exact ties (complete data) terminate immediately.
constexpr double kIntervalSlack = 1e-7;
// Stream labels that regular iteration indices never collide with.
constexpr std::uint64_t kInitIteration = 0;
constexpr std::uint64_t kHeldoutLabel = 0x48454c44ULL;

struct ImputedRows {
  std::vector<int> rows;  // indices of incomplete rows, ascending
  // draws[j][m] completes rows[j] in dataset m
  std::vector<std::vector<Permutation>> draws;
};

ImputedRows draw_completions(const RankingSeries& series, int n_imputations,
                             std::uint64_t seed, std::uint64_t iteration) {
  ImputedRows out;
  for (int t = 0; t < series.size(); ++t)
    if (!series.row(t).complete()) out.rows.push_back(t);
  out.draws.resize(out.rows.size());
  for (std::size_t j = 0; j < out.rows.size(); ++j) {
    const int t = out.rows[j];
    Rng rng(derive_seed(seed, iteration, static_cast<std::uint64_t>(t)));
    out.draws[j].reserve(static_cast<std::size_t>(n_imputations));
    for (int m = 0; m < n_imputations; ++m)
      out.draws[j].push_back(series.row(t).random_completion(rng));
  }
  return out;
}

std::vector<detail::DataView> views_from(const RankingSeries& series, const ImputedRows& imp,
                                         int n_imputations, DistanceKind kind) {
  const int n = series.size();
  std::vector<Permutation> fixed;
  fixed.reserve(static_cast<std::size_t>(n));
  std::vector<int> fixed_at(static_cast<std::size_t>(n), -1);
  std::vector<int> imp_at(static_cast<std::size_t>(n), -1);
  for (int t = 0; t < n; ++t) {
    if (series.row(t).complete()) {
      fixed_at[static_cast<std::size_t>(t)] = static_cast<int>(fixed.size());
      fixed.push_back(series.row(t).as_permutation());
    }
  }
  for (std::size_t j = 0; j < imp.rows.size(); ++j)
    imp_at[static_cast<std::size_t>(imp.rows[j])] = static_cast<int>(j);

  std::vector<detail::DataView> views;
  views.reserve(static_cast<std::size_t>(n_imputations));
  std::vector<const Permutation*> cur(static_cast<std::size_t>(n));
  for (int m = 0; m < n_imputations; ++m) {
    for (int t = 0; t < n; ++t) {
      const std::size_t ut = static_cast<std::size_t>(t);
      cur[ut] = fixed_at[ut] >= 0 ? &fixed[static_cast<std::size_t>(fixed_at[ut])]
                                  : &imp.draws[static_cast<std::size_t>(imp_at[ut])]
                                              [static_cast<std::size_t>(m)];
    }
    detail::DataView v;
    v.d.resize(static_cast<std::size_t>(n - 1));
    double sum = 0;
    for (int i = 0; i + 1 < n; ++i) {
      v.d[static_cast<std::size_t>(i)] =
          distance(*cur[static_cast<std::size_t>(i + 1)], *cur[static_cast<std::size_t>(i)], kind);
      sum += v.d[static_cast<std::size_t>(i)];
    }
    v.presample_mu = sum / static_cast<double>(n - 1);
    views.push_back(std::move(v));
  }
  return views;
}

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0;
  const double m = mean_of(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

void McemOptions::validate() const {
  if (initial_imputations < 1)
    throw validation_error("initial_imputations must be at least 1");
  if (!(precision_epsilon > 0)) throw validation_error("precision_epsilon must be positive");
  if (!(interval_halfwidth >= 0)) throw validation_error("interval_halfwidth must be nonnegative");
  if (max_iterations < 1) throw validation_error("max_iterations must be at least 1");
}

std::vector<RankingSeries> impute_completions(const RankingSeries& series, int n_imputations,
                                              std::uint64_t seed, std::uint64_t iteration) {
  if (n_imputations < 1) throw validation_error("n_imputations must be at least 1");
  const ImputedRows imp = draw_completions(series, n_imputations, seed, iteration);
  std::vector<RankingSeries> out;
  out.reserve(static_cast<std::size_t>(n_imputations));
  for (int m = 0; m < n_imputations; ++m) {
    RankingSeries s = series;
    for (std::size_t j = 0; j < imp.rows.size(); ++j)
      s.set_row(imp.rows[j], PartialRanking(imp.draws[j][static_cast<std::size_t>(m)]));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RankingSeries> impute_completions(const RankingSeries& series, int n_imputations,
                                              Rng& rng) {
  if (n_imputations < 1) throw validation_error("n_imputations must be at least 1");
  std::vector<RankingSeries> out;
  out.reserve(static_cast<std::size_t>(n_imputations));
  for (int m = 0; m < n_imputations; ++m) {
    RankingSeries s = series;
    for (int t = 0; t < s.size(); ++t)
      if (!s.row(t).complete()) s.set_row(t, PartialRanking(s.row(t).random_completion(rng)));
    out.push_back(std::move(s));
  }
  return out;
}

double q_function(std::span<const RankingSeries> completions, ModelOrder order,
                  const Coefficients& coef, DistanceKind kind) {
  if (completions.empty()) throw validation_error("q_function needs at least one series");
  if (coef.order() != order) throw validation_error("coefficient shape does not match order");
  coef.validate();
  const int k = completions.front().k();
  std::vector<detail::DataView> views;
  views.reserve(completions.size());
  for (const RankingSeries& s : completions) {
    if (s.k() != k) throw validation_error("completions must share one item count");
    views.push_back(detail::make_view(s, kind));
  }
  return detail::avg_loglik(views, k, order, coef, kind);
}

McemResult mcem_fit(const RankingSeries& series, ModelOrder order, DistanceKind kind,
                    const McemOptions& options) {
  order.validate();
  options.validate();
  const int k = series.k();
  const bool complete = series.complete();

  McemResult out;

  // Start point: warm start if supplied, else a plain multistart fit on one
  // imputation (the series itself when nothing is missing).
  Coefficients beta_prev;
  if (options.fit.init) {
    if (options.fit.init->order() != order)
      throw validation_error("init coefficient shape does not match order");
    options.fit.init->validate();
    beta_prev = *options.fit.init;
  } else {
    const ImputedRows imp0 = draw_completions(series, 1, options.seed, kInitIteration);
    const auto views0 = views_from(series, imp0, 1, kind);
    FitOptions cold = options.fit;
    cold.init.reset();
    beta_prev = detail::fit_views(views0, k, order, kind, cold).coef;
  }

  // Frozen monitoring set, drawn once so heldout_loglik is comparable
  // across iterations.
  const int n_held = complete ? 1 : std::min(options.initial_imputations, 50);
  const std::uint64_t held_master = derive_seed(options.seed, kHeldoutLabel);
  const ImputedRows held_imp = draw_completions(series, n_held, held_master, kInitIteration);
  const auto held_views = views_from(series, held_imp, n_held, kind);

  int n_imp = complete ? 1 : options.initial_imputations;
  FitResult current;
  bool accepted = false;
  for (int r = 1; r <= options.max_iterations && !accepted; ++r) {
    const ImputedRows imp =
        draw_completions(series, n_imp, options.seed, static_cast<std::uint64_t>(r));
    const auto views = views_from(series, imp, n_imp, kind);

    FitOptions warm = options.fit;
    warm.init = beta_prev;
    FitResult fr = detail::fit_views(views, k, order, kind, warm);

    const auto ll_new = detail::loglik_each(views, k, order, fr.coef, kind);
    const auto ll_old = detail::loglik_each(views, k, order, beta_prev, kind);
    std::vector<double> delta(ll_new.size());
    std::vector<double> ratio(ll_new.size());
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta[i] = ll_new[i] - ll_old[i];
      ratio[i] = std::exp(-delta[i]);
    }

    McemIteration it;
    it.iteration = r;
    it.n_imputations = n_imp;
    it.coef = fr.coef;
    it.q_value = fr.loglik;
    it.delta_mean = mean_of(delta);
    it.delta_se = sample_sd(delta) / std::sqrt(static_cast<double>(delta.size()));
    it.ratio_sd = sample_sd(ratio);
    it.heldout_loglik = detail::avg_loglik(held_views, k, order, fr.coef, kind);
    it.accepted = it.delta_se <= options.precision_epsilon &&
                  std::abs(it.delta_mean) <=
                      options.interval_halfwidth * it.delta_se + kIntervalSlack;
    accepted = it.accepted;
    out.trace.push_back(std::move(it));

    beta_prev = fr.coef;
    current = std::move(fr);
    if (!accepted && out.trace.back().delta_se > options.precision_epsilon)
      n_imp += (n_imp + 2) / 3;
  }

  current.converged = current.converged && accepted;
  out.fit = std::move(current);
  return out;
}

int inject_missingness(RankingSeries& series, double target_fraction, Rng& rng) {
  if (!(target_fraction >= 0.0 && target_fraction <= 1.0))
    throw validation_error("missingness fraction must lie in [0, 1]");
  const int k = series.k();
  // target counts entries, not rows: rows are degraded until the deleted
  // cell count reaches approximately target_fraction of the n*k table
  const long target =
      std::lround(target_fraction * static_cast<double>(series.size()) * k);
  std::vector<int> pool;
  for (int t = 0; t < series.size(); ++t)
    if (series.row(t).complete()) pool.push_back(t);

  const int max_delete = std::max(2, k / 2);
  std::vector<int> items(static_cast<std::size_t>(k));
  std::iota(items.begin(), items.end(), 1);

  long deleted = 0;
  int made = 0;
  while (deleted < target && !pool.empty()) {
    const std::size_t pick = static_cast<std::size_t>(rng.below(pool.size()));
    const int t = pool[pick];
    pool[pick] = pool.back();
    pool.pop_back();

    const int u = std::min(rng.uniform_int(2, max_delete), k);
    // partial Fisher-Yates: the first u slots become the deleted items
    for (int i = 0; i < u; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) +
          static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k - i)));
      std::swap(items[static_cast<std::size_t>(i)], items[j]);
    }
    std::vector<int> entries = series.row(t).entries();
    for (int i = 0; i < u; ++i)
      entries[static_cast<std::size_t>(items[static_cast<std::size_t>(i)] - 1)] =
          PartialRanking::missing;
    series.set_row(t, PartialRanking(std::move(entries)));
    deleted += u;
    ++made;
  }
  return made;
}

}  // namespace rgarch
