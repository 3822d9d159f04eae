#pragma once

#include <span>
#include <vector>

#include "rgarch/mallows.hpp"
#include "rgarch/permutation.hpp"
#include "rgarch/rng.hpp"

namespace rgarch {

struct ModelOrder {
  int p = 0;  // distance lags
  int q = 0;  // conditional-mean feedback lags

  int m() const { return p > q ? p : q; }
  void validate() const;

  friend bool operator==(const ModelOrder& a, const ModelOrder& b) {
    return a.p == b.p && a.q == b.q;
  }
};

/// Parameters of the conditional-mean recursion
///   mu_t = phi0 + sum_i phi[i] * d_{t-1-i} + sum_j alpha[j] * mu_{t-1-j}
/// with phi0 > 0 and all other coefficients >= 0.
struct Coefficients {
  double phi0 = 0;
  std::vector<double> phi;    // size p
  std::vector<double> alpha;  // size q

  ModelOrder order() const {
    return {static_cast<int>(phi.size()), static_cast<int>(alpha.size())};
  }
  int dim() const { return 1 + static_cast<int>(phi.size() + alpha.size()); }

  /// sum of phi and alpha entries (phi0 excluded); the process is weakly
  /// stationary exactly when this is below 1.
  double persistence() const;

  void validate() const;

  /// Flat layout [phi0, phi..., alpha...] used by the optimizer and the
  /// score/information code.
  std::vector<double> flat() const;
  static Coefficients from_flat(std::span<const double> beta, ModelOrder order);
};

struct StationarityCheck {
  bool stationary = false;
  double margin = 0;  // 1 - persistence
};

StationarityCheck check_stationarity(const Coefficients& coef);

/// Long-run mean distance phi0 / (1 - persistence).  Throws when the
/// process is not stationary.
double unconditional_mean(const Coefficients& coef);

/// A time series of rankings over a fixed item set.  Rows may have missing
/// entries; the lag-1 distance d_t = d(pi_t, pi_{t-1}) is defined exactly
/// when rows t and t-1 are both complete.
class RankingSeries {
 public:
  explicit RankingSeries(int k);
  RankingSeries(int k, std::vector<PartialRanking> rows);

  int k() const { return k_; }
  int size() const { return static_cast<int>(rows_.size()); }
  bool complete() const;
  int n_incomplete_rows() const;

  void push_back(PartialRanking row);
  void set_row(int t, PartialRanking row);
  const PartialRanking& row(int t) const { return rows_[static_cast<std::size_t>(t)]; }
  const std::vector<PartialRanking>& rows() const { return rows_; }

  /// d[i] = distance(row i+1, row i) for i = 0..size()-2.  Requires a fully
  /// observed series.
  std::vector<int> distance_series(DistanceKind kind) const;

 private:
  int k_;
  std::vector<PartialRanking> rows_;
};

/// Conditional means and spreads along a stretch of a series.  Entry j
/// describes the transition into row first_row + j (0-based rows), i.e. the
/// model term conditioned on a full lag window.
struct ConditionalMeanPath {
  int first_row = 0;
  std::vector<double> mu;
  std::vector<double> theta;
  bool any_clamped = false;

  int size() const { return static_cast<int>(mu.size()); }
};

/// Evaluates the mean recursion over the observed series.  The first
/// computable term sits m+1 rows in (its p distance lags all exist);
/// feedback terms reaching before that point use the sample mean of the
/// observed distance series.
ConditionalMeanPath conditional_mean_path(const RankingSeries& series, ModelOrder order,
                                          const Coefficients& coef, DistanceKind kind);

/// Same recursion on a raw lag-1 distance vector (d[i] is the distance into
/// row i+1).  presample_mu feeds both the distance lags and feedback lags
/// that reach before the first computable term.
ConditionalMeanPath mean_path_from_distances(std::span<const int> d, int k, ModelOrder order,
                                             const Coefficients& coef, DistanceKind kind,
                                             double presample_mu);

struct SimulationResult {
  RankingSeries series;
  /// Mean path recomputed from the returned window exactly as
  /// conditional_mean_path would, so consumers can reproduce it bit for bit.
  ConditionalMeanPath path;
};

/// Simulates n rankings of k items.  The chain starts from uniform draws
/// with pre-sample distances and feedback pinned at the unconditional mean,
/// then discards a burn-in of 100 + m steps.  Non-stationary coefficient
/// sets are rejected unless allow_nonstationary is set; with the override,
/// half the uniform mean seeds the pre-sample lags instead.
SimulationResult simulate(int k, int n, const Coefficients& coef, DistanceKind kind,
                          Rng& rng, bool allow_nonstationary = false);

/// Autocorrelation structure implied by a stationary order-(1,1) model via
/// its ARMA form: rho(h) decays geometrically in phi1 + alpha1.
struct TheoreticalAcf {
  double phi1 = 0;
  double alpha1 = 0;
  double sigma2_eps = 0;

  double gamma0() const;
  double rho(int lag) const;
};

TheoreticalAcf theoretical_acf_11(double phi1, double alpha1, double sigma2_eps);

struct AcfPacf {
  /// acf[h] for h = 0..max_lag, biased (1/n) normalization; acf[0] = 1.
  std::vector<double> acf;
  /// pacf[h] for h = 1..max_lag at index h (index 0 unused, set to 1).
  std::vector<double> pacf;
};

/// Sample ACF and, via Durbin-Levinson, PACF.  Throws on constant input.
AcfPacf empirical_acf_pacf(std::span<const double> x, int max_lag);

}  // namespace rgarch
