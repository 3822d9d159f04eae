#pragma once

#include <utility>
#include <vector>

#include "rgarch/permutation.hpp"
#include "rgarch/rng.hpp"

namespace rgarch {

/// Mallows distribution on rankings of k items:
///   p(pi) = exp(-theta * d(pi, mode)) / psi(theta)
/// with spread theta > 0 and d the chosen distance.
struct MallowsSpec {
  Permutation mode;
  double theta;
  DistanceKind kind;

  MallowsSpec(Permutation mode_, double theta_, DistanceKind kind_);
  int k() const { return mode.k(); }
};

/// Spread beyond which exp(-theta * d) underflows any contrast between
/// distances; the distribution is treated as a point mass at the mode.
double theta_cap(int k);

/// log of the normalizing constant psi(theta).  Stable for theta in
/// (0, theta_cap]; throws on theta <= 0.
double log_psi(double theta, int k, DistanceKind kind);

/// psi itself; throws on overflow (the log form is the workhorse).
double psi(double theta, int k, DistanceKind kind);

/// Expected distance from the mode under the model.  Strictly decreasing in
/// theta, with limits uniform_mean(k, kind) as theta -> 0 and 0 as
/// theta -> inf.
double mean_distance(double theta, int k, DistanceKind kind);

/// Variance of the distance from the mode; equals -d/dtheta mean_distance.
double variance_distance(double theta, int k, DistanceKind kind);

double log_pmf(const Permutation& pi, const MallowsSpec& spec);

/// One draw.  Kendall uses an exact inverse-CDF sampler on the inversion
/// table; Hamming runs a fresh Metropolis chain (see MallowsSampler).
Permutation sample_mallows(const MallowsSpec& spec, Rng& rng);

/// Reusable sampler for repeated draws from one fixed spec.  For Hamming the
/// Metropolis chain persists across draws, so the burn-in cost is paid once.
class MallowsSampler {
 public:
  explicit MallowsSampler(MallowsSpec spec);
  Permutation draw(Rng& rng);
  const MallowsSpec& spec() const { return spec_; }

 private:
  MallowsSpec spec_;
  // Hamming chain state.
  std::vector<int> chain_;
  int chain_dist_ = 0;
  bool warmed_up_ = false;

  Permutation draw_kendall(Rng& rng);
  Permutation draw_hamming(Rng& rng);
  void metropolis_steps(int n, Rng& rng);
};

/// Exhaustive tabulation of a Mallows distribution, built by walking all k!
/// rankings with its own quadratic-time distance counts.  Deliberately
/// independent of the closed forms above; tests compare the two.
struct ExactMallowsTable {
  double psi = 0;
  double mean = 0;
  double variance = 0;
  /// pmf per ranking, aligned with `support`.
  std::vector<double> pmf;
  std::vector<Permutation> support;
};

/// Requires k <= 8 (8! = 40320 rankings).  Mode is the identity; by the
/// right-invariance of both distances the moments hold for any mode.
ExactMallowsTable enumerate_mallows(int k, double theta, DistanceKind kind);

}  // namespace rgarch
