#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgarch/rng.hpp"

namespace rgarch {

enum class DistanceKind { kendall, hamming };

const char* to_string(DistanceKind kind);
DistanceKind distance_kind_from_string(const std::string& name);

/// A full ranking of k items.  Entry i (0-based) holds the rank, 1..k, given
/// to item i+1.  Lower rank means better placed.  The stored vector is always
/// a bijection onto {1..k}; the constructor rejects anything else.
class Permutation {
 public:
  explicit Permutation(std::vector<int> ranks);

  static Permutation identity(int k);
  static Permutation random_uniform(int k, Rng& rng);

  int k() const { return static_cast<int>(ranks_.size()); }

  /// Rank of item (1-based item id).
  int rank_of(int item) const { return ranks_[static_cast<std::size_t>(item - 1)]; }
  int operator()(int item) const { return rank_of(item); }

  const std::vector<int>& ranks() const { return ranks_; }

  /// Inverse ranking: entry r-1 holds the item occupying rank r.
  Permutation inverse() const;

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.ranks_ == b.ranks_;
  }
  friend bool operator!=(const Permutation& a, const Permutation& b) {
    return !(a == b);
  }

 private:
  struct unchecked_tag {};
  Permutation(std::vector<int> ranks, unchecked_tag) : ranks_(std::move(ranks)) {}

  std::vector<int> ranks_;

  friend Permutation compose(const Permutation&, const Permutation&);
  friend class PartialRanking;
  friend class MallowsSampler;
};

/// Function composition (a then b read right to left): result(i) = a(b(i)).
Permutation compose(const Permutation& a, const Permutation& b);

/// Number of discordant item pairs, counted in O(k log k) via merge sort.
int kendall_distance(const Permutation& a, const Permutation& b);

/// Number of items whose ranks disagree.
int hamming_distance(const Permutation& a, const Permutation& b);

int distance(const Permutation& a, const Permutation& b, DistanceKind kind);

/// Largest attainable value of the distance on rankings of k items:
/// k(k-1)/2 pairs for Kendall, k mismatches for Hamming.
int max_distance(int k, DistanceKind kind);

/// A ranking with some ranks unobserved.  Missing slots are stored as 0.
class PartialRanking {
 public:
  static constexpr int missing = 0;

  /// entries[i] is the rank of item i+1, or `missing`.  Observed ranks must
  /// be distinct values in 1..k.
  explicit PartialRanking(std::vector<int> entries);
  PartialRanking(const Permutation& full);  // NOLINT(google-explicit-constructor)

  int k() const { return static_cast<int>(entries_.size()); }
  int n_missing() const { return n_missing_; }
  bool complete() const { return n_missing_ == 0; }

  /// Rank of item (1-based), or `missing`.
  int entry(int item) const { return entries_[static_cast<std::size_t>(item - 1)]; }
  const std::vector<int>& entries() const { return entries_; }

  /// Items with unobserved ranks, ascending; 1-based ids.
  std::vector<int> missing_items() const;
  /// Ranks not used by any observed entry, ascending.
  std::vector<int> free_ranks() const;

  /// Requires complete().
  Permutation as_permutation() const;

  /// All completions, enumerated in lexicographic order of the assignment of
  /// free ranks to missing items.  Refuses factorially large enumerations:
  /// requires n_missing() <= max_missing.
  std::vector<Permutation> enumerate_completions(int max_missing = 8) const;

  /// One completion drawn uniformly from all n_missing()! possibilities.
  Permutation random_completion(Rng& rng) const;

  friend bool operator==(const PartialRanking& a, const PartialRanking& b) {
    return a.entries_ == b.entries_;
  }
  friend bool operator!=(const PartialRanking& a, const PartialRanking& b) {
    return !(a == b);
  }

 private:
  std::vector<int> entries_;
  int n_missing_ = 0;
};

}  // namespace rgarch
