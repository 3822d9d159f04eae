#pragma once

// Shared machinery between the plain fitter and the EM fitter: likelihood,
// score and information evaluated as averages over one or more complete
// distance series under a common coefficient vector.  Not installed.

#include <span>
#include <vector>

#include "rgarch/inference.hpp"
#include "rgarch/process.hpp"

namespace rgarch::detail {

/// One complete lag-1 distance series plus the pre-sample mean that feeds
/// lag windows reaching before the first computable term.
struct DataView {
  std::vector<int> d;
  double presample_mu = 0;
};

DataView make_view(const RankingSeries& series, DistanceKind kind);

/// Log-likelihood averaged over the views.
double avg_loglik(std::span<const DataView> views, int k, ModelOrder order,
                  const Coefficients& coef, DistanceKind kind);

/// Log-likelihood of each view separately, sharing one link cache.
std::vector<double> loglik_each(std::span<const DataView> views, int k, ModelOrder order,
                                const Coefficients& coef, DistanceKind kind);

/// Average score/information across views; any output span may be empty to
/// skip it.  info is row-major dim x dim.
void avg_score_info(std::span<const DataView> views, int k, ModelOrder order,
                    const Coefficients& coef, DistanceKind kind, double* loglik_out,
                    std::span<double> score_out, std::span<double> info_out);

/// Full optimization pipeline over the averaged likelihood.  Path and
/// residuals in the result come from views[0].
FitResult fit_views(std::span<const DataView> views, int k, ModelOrder order,
                    DistanceKind kind, const FitOptions& options);

/// Standard errors from a row-major information matrix; returns true when
/// the matrix was invertible, false when a pseudo-inverse was used.
bool std_errors_from_information(std::span<const double> info, int dim,
                                 std::vector<double>& se_out);

}  // namespace rgarch::detail
