#include <doctest.h>

#include <cmath>

#include "rgarch/errors.hpp"
#include "rgarch/link.hpp"
#include "rgarch/process.hpp"
#include "support/helpers.hpp"

using namespace rgarch;
using doctest::Approx;

namespace {

RankingSeries constant_series(int k, int n) {
  RankingSeries s(k);
  for (int t = 0; t < n; ++t) s.push_back(PartialRanking(Permutation::identity(k)));
  return s;
}

}  // namespace

TEST_SUITE("process") {

TEST_CASE("coefficient validation and flat layout") {
  Coefficients c{3.0, {0.2, 0.1}, {0.3}};
  c.validate();
  CHECK(c.order() == ModelOrder{2, 1});
  CHECK(c.dim() == 4);
  CHECK(c.persistence() == Approx(0.6));
  const auto beta = c.flat();
  CHECK(beta == std::vector<double>{3.0, 0.2, 0.1, 0.3});
  const Coefficients back = Coefficients::from_flat(beta, {2, 1});
  CHECK(back.phi0 == 3.0);
  CHECK(back.phi == c.phi);
  CHECK(back.alpha == c.alpha);

  CHECK_THROWS_AS((Coefficients{0.0, {}, {}}.validate()), validation_error);
  CHECK_THROWS_AS((Coefficients{1.0, {-0.1}, {}}.validate()), validation_error);
  CHECK_THROWS_AS(Coefficients::from_flat(std::vector<double>{1.0, 0.2}, {2, 0}),
                  validation_error);
}

TEST_CASE("stationarity margin and long-run mean") {
  CHECK(check_stationarity(Coefficients{1.0, {0.2, 0.2}, {0.2}}).stationary);
  CHECK(check_stationarity(Coefficients{1.0, {0.2, 0.2}, {0.2}}).margin == Approx(0.4));
  CHECK_FALSE(check_stationarity(Coefficients{1.0, {0.5}, {0.5}}).stationary);
  CHECK(unconditional_mean(Coefficients{3.0, {0.3}, {0.2}}) == Approx(6.0));
  CHECK(unconditional_mean(Coefficients{1.0, {}, {}}) == Approx(1.0));
  CHECK_THROWS_AS(unconditional_mean(Coefficients{1.0, {0.6}, {0.4}}), validation_error);
}

TEST_CASE("ranking series bookkeeping and distance sequence") {
  RankingSeries s(3);
  s.push_back(PartialRanking(Permutation({1, 2, 3})));
  s.push_back(PartialRanking(Permutation({2, 1, 3})));
  s.push_back(PartialRanking(Permutation({3, 1, 2})));
  CHECK(s.size() == 3);
  CHECK(s.complete());
  // (2,1,3) -> (3,1,2) flips only the order of items 1 and 3
  CHECK(s.distance_series(DistanceKind::kendall) == std::vector<int>{1, 1});
  CHECK(s.distance_series(DistanceKind::hamming) == std::vector<int>{2, 2});

  CHECK_THROWS_AS(s.push_back(PartialRanking(Permutation::identity(4))), validation_error);

  s.push_back(PartialRanking({PartialRanking::missing, 1, PartialRanking::missing}));
  CHECK_FALSE(s.complete());
  CHECK(s.n_incomplete_rows() == 1);
  CHECK_THROWS_AS(s.distance_series(DistanceKind::kendall), validation_error);
}

TEST_CASE("a memoryless model pins the mean path at its intercept") {
  Rng rng(7);
  RankingSeries s(5);
  for (int t = 0; t < 20; ++t)
    s.push_back(PartialRanking(Permutation::random_uniform(5, rng)));
  const auto path = conditional_mean_path(s, {0, 0}, Coefficients{2.0, {}, {}},
                                          DistanceKind::kendall);
  CHECK(path.first_row == 1);
  CHECK(path.size() == 19);
  for (double mu : path.mu) CHECK(mu == 2.0);
  for (double theta : path.theta)
    CHECK(theta == Approx(path.theta[0]).epsilon(1e-12));
}

TEST_CASE("mean recursion values pinned by hand") {
  const std::vector<int> d{1, 2, 3};
  SUBCASE("distance lags only") {
    const auto path = mean_path_from_distances(d, 5, {1, 0}, Coefficients{1.0, {0.5}, {}},
                                               DistanceKind::kendall, 99.0);
    // presample never enters when q = 0
    REQUIRE(path.size() == 2);
    CHECK(path.first_row == 2);
    CHECK(path.mu[0] == Approx(1.0 + 0.5 * 1));
    CHECK(path.mu[1] == Approx(1.0 + 0.5 * 2));
  }
  SUBCASE("feedback draws on the presample mean before the first term") {
    const auto path = mean_path_from_distances(d, 5, {1, 1}, Coefficients{0.5, {0.1}, {0.3}},
                                               DistanceKind::kendall, 2.0);
    REQUIRE(path.size() == 2);
    CHECK(path.mu[0] == Approx(0.5 + 0.1 * 1 + 0.3 * 2.0));
    CHECK(path.mu[1] == Approx(0.5 + 0.1 * 2 + 0.3 * path.mu[0]));
  }
  SUBCASE("spreads come from the clamped link") {
    const auto path = mean_path_from_distances(d, 5, {0, 0}, Coefficients{2.5, {}, {}},
                                               DistanceKind::kendall, 0.0);
    CHECK(path.theta[0] == Approx(theta_from_mean(2.5, 5, DistanceKind::kendall)));
    CHECK_FALSE(path.any_clamped);
  }
  SUBCASE("an explosive intercept trips the clamp flag") {
    const auto path = mean_path_from_distances(d, 5, {0, 0}, Coefficients{50.0, {}, {}},
                                               DistanceKind::kendall, 0.0);
    CHECK(path.any_clamped);
  }
}

TEST_CASE("a constant series with distance lags keeps the mean at the intercept") {
  const auto path = conditional_mean_path(constant_series(4, 10), {1, 0},
                                          Coefficients{1.5, {0.4}, {}}, DistanceKind::kendall);
  for (double mu : path.mu) CHECK(mu == Approx(1.5));
}

TEST_CASE("series shorter than the lag window are rejected") {
  CHECK_THROWS_AS(conditional_mean_path(constant_series(4, 3), {2, 0},
                                        Coefficients{1.0, {0.1, 0.1}, {}},
                                        DistanceKind::kendall),
                  validation_error);
  CHECK_NOTHROW(conditional_mean_path(constant_series(4, 4), {2, 0},
                                      Coefficients{1.0, {0.1, 0.1}, {}},
                                      DistanceKind::kendall));
}

TEST_CASE("simulation is deterministic in the seed and reproducible") {
  const Coefficients coef{1.0, {0.4}, {}};
  Rng r1(321), r2(321), r3(99);
  const SimulationResult a = simulate(10, 60, coef, DistanceKind::kendall, r1);
  const SimulationResult b = simulate(10, 60, coef, DistanceKind::kendall, r2);
  const SimulationResult c = simulate(10, 60, coef, DistanceKind::kendall, r3);
  REQUIRE(a.series.size() == 60);
  CHECK(a.series.rows() == b.series.rows());
  CHECK(a.path.mu == b.path.mu);
  bool any_diff = false;
  for (int t = 0; t < 60; ++t)
    any_diff = any_diff || !(a.series.row(t) == c.series.row(t));
  CHECK(any_diff);
}

TEST_CASE("the returned mean path is exactly the recomputation from the window") {
  const Coefficients coef{2.0, {0.25}, {0.3}};
  Rng rng(555);
  const SimulationResult sim = simulate(8, 120, coef, DistanceKind::hamming, rng);
  const auto recomputed =
      conditional_mean_path(sim.series, coef.order(), coef, DistanceKind::hamming);
  CHECK(sim.path.first_row == recomputed.first_row);
  CHECK(sim.path.mu == recomputed.mu);
  CHECK(sim.path.theta == recomputed.theta);
}

TEST_CASE("memoryless simulation reproduces its target mean distance") {
  Rng rng(1234);
  const SimulationResult sim = simulate(6, 4000, Coefficients{3.0, {}, {}},
                                        DistanceKind::kendall, rng);
  const auto d = sim.series.distance_series(DistanceKind::kendall);
  std::vector<double> dd(d.begin(), d.end());
  CHECK(testsupport::mean(dd) == Approx(3.0).epsilon(0.03));
}

TEST_CASE("a larger intercept drives rankings further apart") {
  Rng r1(42), r2(42);
  const auto lo = simulate(10, 2000, Coefficients{3.0, {}, {}}, DistanceKind::kendall, r1);
  const auto hi = simulate(10, 2000, Coefficients{7.0, {}, {}}, DistanceKind::kendall, r2);
  const auto dlo = lo.series.distance_series(DistanceKind::kendall);
  const auto dhi = hi.series.distance_series(DistanceKind::kendall);
  std::vector<double> a(dlo.begin(), dlo.end()), b(dhi.begin(), dhi.end());
  CHECK(testsupport::mean(a) + 2.0 < testsupport::mean(b));
}

TEST_CASE("feedback lifts the distance autocorrelation at lag one") {
  Rng r1(7), r2(7);
  const auto pure_ar =
      simulate(10, 8000, Coefficients{3.0, {0.3}, {}}, DistanceKind::kendall, r1);
  const auto with_fb =
      simulate(10, 8000, Coefficients{3.0, {0.3}, {0.3}}, DistanceKind::kendall, r2);
  auto acf1 = [](const RankingSeries& s) {
    const auto d = s.distance_series(DistanceKind::kendall);
    std::vector<double> x(d.begin(), d.end());
    return empirical_acf_pacf(x, 1).acf[1];
  };
  CHECK(acf1(with_fb.series) > acf1(pure_ar.series));
}

TEST_CASE("nonstationary coefficients require the explicit override") {
  const Coefficients runaway{1.0, {0.7}, {0.5}};
  Rng rng(3);
  CHECK_THROWS_AS(simulate(5, 50, runaway, DistanceKind::kendall, rng), validation_error);
  CHECK_NOTHROW(simulate(5, 50, runaway, DistanceKind::kendall, rng, true));
}

TEST_CASE("model innovations behave as martingale differences") {
  Rng rng(2718);
  const Coefficients coef{2.0, {0.3}, {0.3}};
  const auto sim = simulate(8, 3000, coef, DistanceKind::kendall, rng);
  const auto d = sim.series.distance_series(DistanceKind::kendall);
  const int m = coef.order().m();
  std::vector<double> eps;
  for (int idx = 0; idx < sim.path.size(); ++idx)
    eps.push_back(d[static_cast<std::size_t>(idx + m)] - sim.path.mu[static_cast<std::size_t>(idx)]);
  const double n = static_cast<double>(eps.size());
  CHECK(std::abs(testsupport::mean(eps)) < 3 * testsupport::sample_sd(eps) / std::sqrt(n));
  const auto acf = empirical_acf_pacf(eps, 3);
  CHECK(std::abs(acf.acf[1]) < 3 / std::sqrt(n));
  CHECK(std::abs(acf.acf[2]) < 4 / std::sqrt(n));
}

TEST_CASE("order-(1,1) autocorrelation closed form") {
  SUBCASE("no feedback reduces to a geometric decay in phi1") {
    const TheoreticalAcf acf = theoretical_acf_11(0.4, 0.0, 1.0);
    CHECK(acf.rho(1) == Approx(0.4));
    CHECK(acf.rho(3) == Approx(0.4 * 0.4 * 0.4));
  }
  SUBCASE("no distance lag means no autocorrelation") {
    const TheoreticalAcf acf = theoretical_acf_11(0.0, 0.5, 1.0);
    CHECK(acf.rho(1) == Approx(0.0));
    CHECK(acf.rho(4) == Approx(0.0));
  }
  SUBCASE("pinned values for a mixed model") {
    const TheoreticalAcf acf = theoretical_acf_11(0.3, 0.3, 2.0);
    // leading coefficient 0.3(1 - 0.3*0.6)/(1 - 2*0.09 - 0.09)
    const double lead = 0.3 * (1 - 0.18) / (1 - 0.18 - 0.09);
    CHECK(acf.rho(1) == Approx(lead));
    CHECK(acf.rho(2) == Approx(lead * 0.6));
    CHECK(acf.gamma0() == Approx(2.0 * (1 - 0.18 - 0.09) / (1 - 0.36)));
    CHECK(acf.rho(0) == 1.0);
  }
  CHECK_THROWS_AS(theoretical_acf_11(0.6, 0.4, 1.0), validation_error);
}

TEST_CASE("sample autocorrelation of an autoregressive sequence") {
  Rng rng(11);
  std::vector<double> x;
  double prev = 0;
  for (int t = 0; t < 20000; ++t) {
    // innovations from a symmetric two-point distribution
    const double e = rng.uniform() < 0.5 ? -1.0 : 1.0;
    prev = 0.5 * prev + e;
    x.push_back(prev);
  }
  const AcfPacf r = empirical_acf_pacf(x, 6);
  CHECK(r.acf[0] == 1.0);
  CHECK(r.acf[1] == Approx(0.5).epsilon(0.05));
  CHECK(r.acf[2] == Approx(0.25).epsilon(0.12));
  CHECK(r.pacf[1] == Approx(0.5).epsilon(0.05));
  for (int h = 2; h <= 6; ++h)
    CHECK(std::abs(r.pacf[static_cast<std::size_t>(h)]) < 4 / std::sqrt(20000.0));
}

TEST_CASE("autocorrelation input validation") {
  std::vector<double> flat(100, 3.25);
  CHECK_THROWS_AS(empirical_acf_pacf(flat, 5), validation_error);
  std::vector<double> tiny{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(empirical_acf_pacf(tiny, 3), validation_error);
  CHECK_THROWS_AS(empirical_acf_pacf(tiny, 0), validation_error);
}

}  // TEST_SUITE
