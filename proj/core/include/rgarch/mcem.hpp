#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rgarch/inference.hpp"
#include "rgarch/process.hpp"
#include "rgarch/rng.hpp"

namespace rgarch {

/// Settings for the Monte Carlo EM fitter for series with missing ranks.
struct McemOptions {
  /// Imputation count for the first iteration.
  int initial_imputations = 200;
  /// Target Monte Carlo standard error of the mean per-dataset likelihood
  /// gain; iterations with more noise than this grow the imputation count.
  double precision_epsilon = 0.05;
  /// Half-width, in standard-error units, of the interval that must cover
  /// the mean gain before an iteration is accepted as converged.
  double interval_halfwidth = 4.0;
  int max_iterations = 60;
  std::uint64_t seed = 20240817;
  /// Settings for the inner maximizations.  When `fit.init` is set it seeds
  /// the first EM iteration directly; otherwise the start point comes from a
  /// plain fit on a single imputation.
  FitOptions fit;

  void validate() const;
};

/// One EM iteration as recorded in the trace.
struct McemIteration {
  int iteration = 0;  // 1-based
  int n_imputations = 0;
  /// Maximizer of this iteration's average completed-data likelihood.
  Coefficients coef;
  /// Attained average log-likelihood at `coef`.
  double q_value = 0;
  /// Mean and Monte Carlo standard error of the per-dataset gain of `coef`
  /// over the previous coefficients.
  double delta_mean = 0;
  double delta_se = 0;
  /// Spread of the per-dataset likelihood ratios exp(-gain); a dispersion
  /// diagnostic on the same quantity in ratio form.
  double ratio_sd = 0;
  /// Average log-likelihood of `coef` on a frozen imputation set drawn once
  /// up front, so successive iterations are comparable.
  double heldout_loglik = 0;
  bool accepted = false;
};

struct McemResult {
  /// Final fit; path, residuals and term counts refer to the first dataset
  /// of the last imputation set.  `converged` requires both an accepted EM
  /// iteration and a converged inner maximization.
  FitResult fit;
  std::vector<McemIteration> trace;
};

/// Draws `n_imputations` completed copies of the series.  Missing ranks in
/// each row are filled uniformly at random over the arrangements of that
/// row's unused ranks; observed entries are never touched.
///
/// Draws are organized as one stream per incomplete row, keyed by
/// (seed, iteration, row): copy m takes the m-th draw of each row's stream,
/// so enlarging n_imputations extends the set without changing earlier
/// copies, and different iterations decorrelate.
std::vector<RankingSeries> impute_completions(const RankingSeries& series, int n_imputations,
                                              std::uint64_t seed, std::uint64_t iteration);

/// Same fill rule driven by one caller-owned stream, consumed copy-major
/// (all rows of copy 0, then copy 1, ...).
std::vector<RankingSeries> impute_completions(const RankingSeries& series, int n_imputations,
                                              Rng& rng);

/// Average complete-data log-likelihood over a set of completed series
/// sharing one item count.  This is the objective each EM iteration
/// maximizes, exposed for diagnostics.
double q_function(std::span<const RankingSeries> completions, ModelOrder order,
                  const Coefficients& coef, DistanceKind kind);

/// Monte Carlo EM estimation.  Each iteration imputes the missing ranks,
/// maximizes the average completed-data likelihood warm-started from the
/// previous estimate, and accepts once the mean per-dataset gain is both
/// measured precisely (standard error at most precision_epsilon) and
/// statistically indistinguishable from zero.  Noisy iterations enlarge the
/// imputation count by a third.  A fully observed series collapses to a
/// single dataset and reproduces the plain maximum likelihood fit.
///
/// Exhausting max_iterations is reported through `fit.converged`, not an
/// exception; the trace always covers every iteration run.
McemResult mcem_fit(const RankingSeries& series, ModelOrder order, DistanceKind kind,
                    const McemOptions& options = {});

/// Test harness for missing-data experiments: degrades uniformly chosen
/// complete rows, deleting between 2 and max(2, k/2) ranks at random items
/// of each, until approximately `target_fraction` of the n*k table cells
/// are missing.  Returns the number of rows degraded.
int inject_missingness(RankingSeries& series, double target_fraction, Rng& rng);

}  // namespace rgarch
