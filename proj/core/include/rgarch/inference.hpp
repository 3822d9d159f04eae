#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgarch/process.hpp"

namespace rgarch {

struct FitOptions {
  /// Number of optimizer start points; ignored when init is set.
  int n_starts = 5;
  int max_gradient_iters = 200;
  int max_simplex_iters = 4000;
  int max_newton_iters = 40;
  /// Joint stopping rule: final step must move the objective by less than
  /// tol_loglik and every coefficient by less than tol_beta.
  double tol_loglik = 1e-8;
  double tol_beta = 1e-6;
  /// Seeds only the deterministic jitter of the extra start points.
  std::uint64_t seed = 20240817;
  /// Warm start: optimize from here instead of the multistart schedule.
  std::optional<Coefficients> init;
};

struct FitResult {
  int k = 0;
  ModelOrder order;
  DistanceKind kind = DistanceKind::kendall;
  Coefficients coef;
  /// Asymptotic standard errors from the inverse information matrix,
  /// ordered like Coefficients::flat().
  std::vector<double> std_errors;
  double loglik = 0;
  double aic = 0;
  double bic = 0;
  /// Number of likelihood terms: series length minus max(p, q) minus one.
  int n_used = 0;
  bool converged = false;
  /// Information matrix was singular; std_errors came from a pseudo-inverse.
  bool se_degenerate = false;
  ConditionalMeanPath path;
  /// Raw innovations d_t - mu_t, aligned with path.
  std::vector<double> residuals;
};

/// Conditional log-likelihood of a complete series: each term conditions on
/// a full lag window, so terms start m+1 transitions in.
double log_likelihood(const RankingSeries& series, ModelOrder order,
                      const Coefficients& coef, DistanceKind kind);

struct ScoreResult {
  double loglik = 0;
  /// Gradient of the log-likelihood in the flat coefficient layout.
  std::vector<double> score;
  /// Outer-product information matrix (row-major dim x dim); positive
  /// semidefinite by construction.
  std::vector<double> information;
};

/// Analytic score and information.  The mean-parameter derivatives follow
/// the same feedback recursion as the mean itself, with zero pre-sample
/// derivatives; terms whose mean hit the admissibility clamp contribute
/// nothing (their spread is locally constant in the coefficients).
ScoreResult score_and_information(const RankingSeries& series, ModelOrder order,
                                  const Coefficients& coef, DistanceKind kind);

/// Conditional maximum likelihood.  Multi-start projected gradient ascent
/// followed by a Nelder-Mead polish and damped Newton steps on the analytic
/// score; coefficients are optimized through a log transform to stay
/// positive, with a smooth penalty discouraging persistence >= 1.
FitResult fit_mle(const RankingSeries& series, ModelOrder order, DistanceKind kind,
                  const FitOptions& options = {});

/// Divisor that puts residuals on a per-item scale: pair count over item
/// count for Kendall, one for Hamming.
double residual_scale(int k, DistanceKind kind);

struct OrderScanEntry {
  ModelOrder order;
  bool ok = false;
  double loglik = 0;
  double aic = 0;
  double bic = 0;
  Coefficients coef;
  bool converged = false;
  std::string message;  // failure reason when not ok
};

struct OrderScanResult {
  std::vector<OrderScanEntry> entries;
  ModelOrder best_aic;
  ModelOrder best_bic;
};

/// Fits every order in [0..p_max] x [0..q_max] and ranks by the information
/// criteria.  All cells are evaluated on a common term window (the head of
/// the series is trimmed for shorter-memory candidates) so the criteria
/// compare like for like.  Individual failures are recorded; only a scan
/// with no usable cell throws.
OrderScanResult order_scan(const RankingSeries& series, DistanceKind kind, int p_max,
                           int q_max, const FitOptions& options = {});

}  // namespace rgarch
