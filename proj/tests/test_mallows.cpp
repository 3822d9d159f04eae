#include <doctest.h>

#include <cmath>
#include <map>

#include "rgarch/errors.hpp"
#include "rgarch/mallows.hpp"
#include "support/helpers.hpp"

using namespace rgarch;
using doctest::Approx;

TEST_SUITE("mallows") {

TEST_CASE("closed-form normalizer and moments match exhaustive tabulation") {
  for (DistanceKind kind : {DistanceKind::kendall, DistanceKind::hamming}) {
    for (int k = 2; k <= 6; ++k) {
      for (double theta : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        CAPTURE(static_cast<int>(kind));
        CAPTURE(k);
        CAPTURE(theta);
        const ExactMallowsTable table = enumerate_mallows(k, theta, kind);
        CHECK(psi(theta, k, kind) == Approx(table.psi).epsilon(1e-10));
        CHECK(mean_distance(theta, k, kind) == Approx(table.mean).epsilon(1e-10));
        CHECK(variance_distance(theta, k, kind) == Approx(table.variance).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("normalizer values pinned by hand") {
  // Kendall, k=3: distances over the six rankings are 0,1,1,2,2,3.
  const double e1 = std::exp(-1.0);
  CHECK(psi(1.0, 3, DistanceKind::kendall) ==
        Approx(1 + 2 * e1 + 2 * e1 * e1 + e1 * e1 * e1).epsilon(1e-14));
  // Hamming, k=3: one ranking at distance 0, three at 2, two at 3.
  CHECK(psi(1.0, 3, DistanceKind::hamming) ==
        Approx(1 + 3 * std::exp(-2.0) + 2 * std::exp(-3.0)).epsilon(1e-14));
  // Kendall, k=2 reduces to a two-point distribution.
  CHECK(psi(0.7, 2, DistanceKind::kendall) == Approx(1 + std::exp(-0.7)).epsilon(1e-14));
  CHECK(mean_distance(0.7, 2, DistanceKind::kendall) ==
        Approx(std::exp(-0.7) / (1 + std::exp(-0.7))).epsilon(1e-14));
}

TEST_CASE("moments approach the uniform limits as the spread vanishes") {
  CHECK(mean_distance(1e-7, 6, DistanceKind::kendall) == Approx(6 * 5 / 4.0).epsilon(1e-5));
  CHECK(mean_distance(1e-7, 5, DistanceKind::hamming) == Approx(4.0).epsilon(1e-5));
  // and collapse to zero when the spread explodes
  CHECK(mean_distance(40.0, 6, DistanceKind::kendall) < 1e-10);
  CHECK(mean_distance(40.0, 5, DistanceKind::hamming) < 1e-10);
  CHECK(variance_distance(40.0, 5, DistanceKind::hamming) < 1e-10);
}

TEST_CASE("mean is strictly decreasing and variance positive in theta") {
  for (DistanceKind kind : {DistanceKind::kendall, DistanceKind::hamming}) {
    for (int k : {2, 5, 12, 31}) {
      double prev = max_distance(k, kind) + 1.0;
      for (double theta : {1e-4, 1e-3, 0.009, 0.02, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double m = mean_distance(theta, k, kind);
        CHECK(m < prev);
        CHECK(variance_distance(theta, k, kind) > 0);
        prev = m;
      }
    }
  }
}

TEST_CASE("log-normalizer slope equals the negated mean distance") {
  for (DistanceKind kind : {DistanceKind::kendall, DistanceKind::hamming}) {
    for (int k : {3, 7, 15}) {
      for (double theta : {0.009, 0.011, 0.3, 1.0, 4.0}) {
        CAPTURE(k);
        CAPTURE(theta);
        const double h = 1e-6 * std::max(1.0, theta);
        const double slope =
            (log_psi(theta + h, k, kind) - log_psi(theta - h, k, kind)) / (2 * h);
        CHECK(slope == Approx(-mean_distance(theta, k, kind)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("mean slope equals the negated variance") {
  for (DistanceKind kind : {DistanceKind::kendall, DistanceKind::hamming}) {
    for (int k : {4, 10}) {
      for (double theta : {0.05, 0.8, 3.0}) {
        const double h = 1e-6;
        const double slope =
            (mean_distance(theta + h, k, kind) - mean_distance(theta - h, k, kind)) / (2 * h);
        CHECK(slope == Approx(-variance_distance(theta, k, kind)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("moment computation is continuous across the small-theta switchover") {
  // probe just either side of the path switch; the true slope effect over
  // this interval is below 1e-11
  const double lo = 0.01 * (1 - 1e-12), hi = 0.01 * (1 + 1e-12);
  for (int k : {5, 20}) {
    CHECK(mean_distance(lo, k, DistanceKind::kendall) ==
          Approx(mean_distance(hi, k, DistanceKind::kendall)).epsilon(1e-9));
    CHECK(variance_distance(lo, k, DistanceKind::kendall) ==
          Approx(variance_distance(hi, k, DistanceKind::kendall)).epsilon(1e-9));
  }
}

TEST_CASE("pmf sums to one and respects distance symmetry") {
  for (DistanceKind kind : {DistanceKind::kendall, DistanceKind::hamming}) {
    const MallowsSpec spec(Permutation({2, 4, 1, 3}), 0.7, kind);
    const ExactMallowsTable table = enumerate_mallows(4, 0.7, kind);
    double total = 0;
    double mode_p = 0;
    double max_p = 0;
    for (const Permutation& pi : table.support) {
      const double p = std::exp(log_pmf(pi, spec));
      total += p;
      if (pi == spec.mode) mode_p = p;
      max_p = std::max(max_p, p);
    }
    CHECK(total == Approx(1.0).epsilon(1e-12));
    CHECK(mode_p == max_p);  // the mode maximizes the pmf
  }
}

TEST_CASE("rankings at equal distance have equal probability") {
  const MallowsSpec spec(Permutation::identity(4), 1.3, DistanceKind::kendall);
  // both at kendall distance 1 from the mode
  CHECK(log_pmf(Permutation({2, 1, 3, 4}), spec) ==
        Approx(log_pmf(Permutation({1, 2, 4, 3}), spec)).epsilon(1e-14));
}

TEST_CASE("parameter domain is enforced") {
  CHECK_THROWS_AS(log_psi(0.0, 4, DistanceKind::kendall), validation_error);
  CHECK_THROWS_AS(mean_distance(-1.0, 4, DistanceKind::hamming), validation_error);
  CHECK_THROWS_AS(MallowsSpec(Permutation::identity(3), 0.0, DistanceKind::kendall),
                  validation_error);
  // psi of a nearly uniform model on many items exceeds double range
  CHECK_THROWS_AS(psi(1e-3, 200, DistanceKind::kendall), std::overflow_error);
  CHECK_NOTHROW(log_psi(1e-3, 200, DistanceKind::kendall));
}

TEST_CASE("beyond the spread cap the distribution degenerates to its mode") {
  const Permutation mode({3, 1, 2});
  const MallowsSpec spec(mode, theta_cap(3) + 1, DistanceKind::kendall);
  CHECK(log_pmf(mode, spec) == 0.0);
  CHECK(std::isinf(log_pmf(Permutation({1, 3, 2}), spec)));
  Rng rng(1);
  for (int i = 0; i < 50; ++i) CHECK(sample_mallows(spec, rng) == mode);
}

TEST_CASE("kendall sampler reproduces the exact distribution on small cases") {
  const ExactMallowsTable table = enumerate_mallows(3, 1.0, DistanceKind::kendall);
  MallowsSampler sampler(MallowsSpec(Permutation::identity(3), 1.0, DistanceKind::kendall));
  Rng rng(367);
  std::map<std::vector<int>, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[sampler.draw(rng).ranks()]++;
  for (std::size_t i = 0; i < table.support.size(); ++i) {
    const double p = table.pmf[i];
    const double freq = counts[table.support[i].ranks()] / static_cast<double>(n);
    CHECK(std::abs(freq - p) < 4.5 * std::sqrt(p * (1 - p) / n));
  }
}

TEST_CASE("kendall sampler matches closed-form moments at scale") {
  const int k = 6;
  const double theta = 0.8;
  MallowsSampler sampler(MallowsSpec(Permutation({3, 6, 1, 4, 2, 5}), theta,
                                     DistanceKind::kendall));
  Rng rng(88);
  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const int d = kendall_distance(sampler.draw(rng), sampler.spec().mode);
    sum += d;
    sumsq += static_cast<double>(d) * d;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double expect_mean = mean_distance(theta, k, DistanceKind::kendall);
  const double expect_var = variance_distance(theta, k, DistanceKind::kendall);
  CHECK(std::abs(mean - expect_mean) < 4.5 * std::sqrt(expect_var / n));
  CHECK(var == Approx(expect_var).epsilon(0.05));
}

TEST_CASE("hamming chain sampler tracks the exact distribution") {
  const int k = 4;
  const double theta = 0.6;
  const ExactMallowsTable table = enumerate_mallows(k, theta, DistanceKind::hamming);
  MallowsSampler sampler(MallowsSpec(Permutation::identity(k), theta, DistanceKind::hamming));
  Rng rng(5150);
  std::map<std::vector<int>, int> counts;
  const int n = 200000;
  for (int i = 0; i < n; ++i) counts[sampler.draw(rng).ranks()]++;
  double tv = 0;
  for (std::size_t i = 0; i < table.support.size(); ++i)
    tv += std::abs(counts[table.support[i].ranks()] / static_cast<double>(n) - table.pmf[i]);
  CHECK(tv / 2 < 0.02);
}

TEST_CASE("hamming chain matches the mean at a larger k") {
  const int k = 9;
  const double theta = 0.5;
  MallowsSampler sampler(MallowsSpec(Permutation::identity(k), theta, DistanceKind::hamming));
  Rng rng(250);
  const int n = 40000;
  double sum = 0;
  for (int i = 0; i < n; ++i)
    sum += hamming_distance(sampler.draw(rng), sampler.spec().mode);
  const double expect = mean_distance(theta, k, DistanceKind::hamming);
  const double sd = std::sqrt(variance_distance(theta, k, DistanceKind::hamming) / n);
  // thinning leaves some chain correlation; allow triple the iid band
  CHECK(std::abs(sum / n - expect) < 3 * 4.5 * sd);
}

TEST_CASE("draws are deterministic in the seed") {
  const MallowsSpec spec(Permutation({2, 1, 4, 3, 5}), 1.1, DistanceKind::kendall);
  Rng a(42), b(42), c(43);
  CHECK(sample_mallows(spec, a) == sample_mallows(spec, b));
  // a different seed almost surely moves at least one of ten draws
  bool any_diff = false;
  Rng a2(42), c2(43);
  for (int i = 0; i < 10; ++i)
    any_diff = any_diff || !(sample_mallows(spec, a2) == sample_mallows(spec, c2));
  CHECK(any_diff);
}

}  // TEST_SUITE
