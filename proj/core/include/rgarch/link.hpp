#pragma once

#include "rgarch/permutation.hpp"

namespace rgarch {

/// Expected distance under the uniform distribution on rankings of k items,
/// i.e. the supremum of mean_distance over theta > 0: k(k-1)/4 for Kendall,
/// k-1 for Hamming.
double uniform_mean(int k, DistanceKind kind);

/// Smallest spread the solver distinguishes from the uniform limit.
inline constexpr double theta_floor = 1e-8;

struct LinkSolve {
  double theta = 0;
  /// Set when mu fell outside (0, uniform_mean) and was pulled back to
  /// uniform_mean * (1 - 1e-9) before solving.
  bool clamped = false;
};

/// Solves mean_distance(theta, k, kind) = mu for theta.
///
/// mu must lie in the open interval (0, uniform_mean(k, kind)); anything else
/// throws.  The solve runs Newton steps (the derivative is the negated
/// distance variance) inside a maintained bracket with bisection fallback,
/// to within 1e-12 of mu in mean space, over theta in
/// [theta_floor, theta_cap(k)].
double theta_from_mean(double mu, int k, DistanceKind kind);

/// Same solve, but out-of-range mu is clamped and flagged instead of
/// throwing.  Model evaluation uses this form so that likelihoods stay
/// finite at extreme parameter values.
LinkSolve theta_from_mean_clamped(double mu, int k, DistanceKind kind);

}  // namespace rgarch
