#include "rgarch/link.hpp"

#include <cmath>

#include "rgarch/errors.hpp"
#include "rgarch/mallows.hpp"

namespace rgarch {

double uniform_mean(int k, DistanceKind kind) {
  if (k < 1) throw validation_error("k must be positive");
  return kind == DistanceKind::kendall ? k * (k - 1) / 4.0 : k - 1.0;
}

namespace {

double solve(double mu, int k, DistanceKind kind) {
  constexpr double tol = 1e-12;
  double lo = theta_floor, hi = theta_cap(k);
  // mean_distance is strictly decreasing, so f(lo) > f(hi).
  if (mean_distance(lo, k, kind) <= mu) return lo;
  if (mean_distance(hi, k, kind) >= mu) return hi;

  double theta = 1.0 < hi ? 1.0 : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = mean_distance(theta, k, kind) - mu;
    if (std::abs(f) <= tol) return theta;
    if (f > 0) {
      lo = theta;
    } else {
      hi = theta;
    }
    // d(mean)/d(theta) = -variance, so the Newton step moves uphill in
    // theta when the mean is still too large.
    const double var = variance_distance(theta, k, kind);
    double next = theta + f / var;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (next == theta) break;
    theta = next;
  }
  return theta;
}

}  // namespace

double theta_from_mean(double mu, int k, DistanceKind kind) {
  const double um = uniform_mean(k, kind);
  if (!(mu > 0) || !(mu < um))
    throw validation_error("mean distance " + std::to_string(mu) +
                           " outside (0, " + std::to_string(um) + ")");
  return solve(mu, k, kind);
}

LinkSolve theta_from_mean_clamped(double mu, int k, DistanceKind kind) {
  const double um = uniform_mean(k, kind);
  LinkSolve out;
  if (!(mu > 0)) {
    // Unreachable with valid coefficients; nearest admissible behavior is
    // the most concentrated model.
    out.theta = theta_cap(k);
    out.clamped = true;
    return out;
  }
  if (!(mu < um)) {
    mu = um * (1 - 1e-9);
    out.clamped = true;
  }
  out.theta = solve(mu, k, kind);
  return out;
}

}  // namespace rgarch
