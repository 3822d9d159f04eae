#include <doctest.h>

#include <algorithm>
#include <map>

#include "rgarch/errors.hpp"
#include "rgarch/permutation.hpp"
#include "support/helpers.hpp"

using namespace rgarch;

TEST_SUITE("permutation") {

TEST_CASE("constructor rejects anything but a bijection onto 1..k") {
  CHECK_THROWS_AS(Permutation({1, 1, 3}), validation_error);
  CHECK_THROWS_AS(Permutation({0, 1, 2}), validation_error);
  CHECK_THROWS_AS(Permutation({1, 2, 4}), validation_error);
  CHECK_THROWS_AS(Permutation({}), validation_error);
  CHECK_NOTHROW(Permutation({3, 1, 2}));
}

TEST_CASE("rank lookup, identity and inverse") {
  const Permutation a({2, 3, 1});
  CHECK(a(1) == 2);
  CHECK(a(3) == 1);
  CHECK(Permutation::identity(4) == Permutation({1, 2, 3, 4}));
  CHECK(a.inverse() == Permutation({3, 1, 2}));
  CHECK(a.inverse().inverse() == a);
  CHECK(compose(a, a.inverse()) == Permutation::identity(3));
  CHECK(Permutation::identity(1).inverse() == Permutation::identity(1));
}

TEST_CASE("composition applies right argument first") {
  const Permutation a({2, 3, 1});
  const Permutation b({1, 3, 2});
  // (a o b)(i) = a(b(i))
  CHECK(compose(a, b) == Permutation({2, 1, 3}));
  CHECK_THROWS_AS(compose(a, Permutation::identity(4)), validation_error);
}

TEST_CASE("kendall distance on pinned examples") {
  CHECK(kendall_distance(Permutation({1, 2, 3}), Permutation({2, 1, 3})) == 1);
  CHECK(kendall_distance(Permutation({3, 1, 2}), Permutation({1, 2, 3})) == 2);
  CHECK(kendall_distance(Permutation({1, 2, 3, 4}), Permutation({4, 3, 2, 1})) == 6);
  CHECK(kendall_distance(Permutation({2, 4, 1, 3}), Permutation({2, 4, 1, 3})) == 0);
  CHECK(max_distance(4, DistanceKind::kendall) == 6);
  CHECK(max_distance(10, DistanceKind::kendall) == 45);
}

TEST_CASE("hamming distance on pinned examples") {
  CHECK(hamming_distance(Permutation({1, 2, 3}), Permutation({2, 1, 3})) == 2);
  CHECK(hamming_distance(Permutation({1, 2, 3, 4}), Permutation({1, 2, 4, 3})) == 2);
  CHECK(hamming_distance(Permutation({4, 3, 2, 1}), Permutation({4, 3, 2, 1})) == 0);
  CHECK(max_distance(5, DistanceKind::hamming) == 5);
}

TEST_CASE("merge-sort kendall agrees with a quadratic pair scan") {
  Rng rng(913);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(40));
    const Permutation a = Permutation::random_uniform(k, rng);
    const Permutation b = Permutation::random_uniform(k, rng);
    CHECK(kendall_distance(a, b) == testsupport::naive_kendall(a.ranks(), b.ranks()));
    CHECK(hamming_distance(a, b) == testsupport::naive_hamming(a.ranks(), b.ranks()));
  }
}

TEST_CASE("kendall equals the inversion count of a composed with b inverse") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(12));
    const Permutation a = Permutation::random_uniform(k, rng);
    const Permutation b = Permutation::random_uniform(k, rng);
    const Permutation c = compose(a, b.inverse());
    int inv = 0;
    for (int r = 1; r <= k; ++r)
      for (int s = r + 1; s <= k; ++s) inv += c(r) > c(s);
    CHECK(kendall_distance(a, b) == inv);
  }
}

TEST_CASE("both distances are right-invariant metrics") {
  Rng rng(4211);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(10));
    const Permutation a = Permutation::random_uniform(k, rng);
    const Permutation b = Permutation::random_uniform(k, rng);
    const Permutation c = Permutation::random_uniform(k, rng);
    for (DistanceKind kind : {DistanceKind::kendall, DistanceKind::hamming}) {
      CHECK(distance(a, b, kind) == distance(b, a, kind));
      CHECK(distance(a, a, kind) == 0);
      CHECK((distance(a, b, kind) == 0) == (a == b));
      CHECK(distance(a, b, kind) <= distance(a, c, kind) + distance(c, b, kind));
      CHECK(distance(compose(a, c), compose(b, c), kind) == distance(a, b, kind));
    }
  }
}

TEST_CASE("hamming distance is never exactly one") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(8));
    const Permutation a = Permutation::random_uniform(k, rng);
    const Permutation b = Permutation::random_uniform(k, rng);
    CHECK(hamming_distance(a, b) != 1);
  }
}

TEST_CASE("partial ranking bookkeeping") {
  // Item 1 holds rank 2, item 4 holds rank 1; items 2 and 3 unobserved.
  const PartialRanking pr({2, PartialRanking::missing, PartialRanking::missing, 1});
  CHECK(pr.k() == 4);
  CHECK(pr.n_missing() == 2);
  CHECK_FALSE(pr.complete());
  CHECK(pr.missing_items() == std::vector<int>{2, 3});
  CHECK(pr.free_ranks() == std::vector<int>{3, 4});
  CHECK_THROWS_AS(pr.as_permutation(), validation_error);

  const PartialRanking full(Permutation({2, 3, 4, 1}));
  CHECK(full.complete());
  CHECK(full.as_permutation() == Permutation({2, 3, 4, 1}));

  CHECK_THROWS_AS(PartialRanking({1, 1, 0}), validation_error);
  CHECK_THROWS_AS(PartialRanking({5, 0, 0, 1}), validation_error);
}

TEST_CASE("completion enumeration is exhaustive and lexicographic") {
  const PartialRanking pr({2, PartialRanking::missing, PartialRanking::missing, 1});
  const auto completions = pr.enumerate_completions();
  REQUIRE(completions.size() == 2);
  CHECK(completions[0] == Permutation({2, 3, 4, 1}));
  CHECK(completions[1] == Permutation({2, 4, 3, 1}));

  const PartialRanking three({PartialRanking::missing, 2, PartialRanking::missing,
                              PartialRanking::missing});
  CHECK(three.enumerate_completions().size() == 6);

  const PartialRanking wide(std::vector<int>(12, PartialRanking::missing));
  CHECK_THROWS_AS(wide.enumerate_completions(), validation_error);

  const PartialRanking none(Permutation({1, 2, 3}));
  const auto only = none.enumerate_completions();
  REQUIRE(only.size() == 1);
  CHECK(only[0] == Permutation({1, 2, 3}));
}

TEST_CASE("random completion is uniform over all completions") {
  const PartialRanking pr({PartialRanking::missing, 3, PartialRanking::missing,
                           PartialRanking::missing});
  const auto completions = pr.enumerate_completions();
  REQUIRE(completions.size() == 6);
  Rng rng(2024);
  std::map<std::vector<int>, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[pr.random_completion(rng).ranks()]++;
  REQUIRE(counts.size() == 6);
  const double expect = n / 6.0;
  const double sd = std::sqrt(n * (1.0 / 6) * (5.0 / 6));
  for (const auto& [ranks, count] : counts) {
    CHECK(std::abs(count - expect) < 4.5 * sd);
    // every observed completion honours the fixed entries
    CHECK(ranks[1] == 3);
  }
}

TEST_CASE("uniform permutation draws hit every ranking of three items evenly") {
  Rng rng(99);
  std::map<std::vector<int>, int> counts;
  const int n = 60000;
  for (int i = 0; i < n; ++i) counts[Permutation::random_uniform(3, rng).ranks()]++;
  REQUIRE(counts.size() == 6);
  const double sd = std::sqrt(n * (1.0 / 6) * (5.0 / 6));
  for (const auto& [ranks, count] : counts)
    CHECK(std::abs(count - n / 6.0) < 4.5 * sd);
}

}  // TEST_SUITE
