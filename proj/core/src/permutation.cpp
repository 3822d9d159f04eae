#include "rgarch/permutation.hpp"

#include <algorithm>
#include <numeric>

#include "rgarch/errors.hpp"

namespace rgarch {

const char* to_string(DistanceKind kind) {
  return kind == DistanceKind::kendall ? "kendall" : "hamming";
}

DistanceKind distance_kind_from_string(const std::string& name) {
  if (name == "kendall") return DistanceKind::kendall;
  if (name == "hamming") return DistanceKind::hamming;
  throw validation_error("unknown distance '" + name + "' (expected kendall or hamming)");
}

namespace {

void check_bijection(const std::vector<int>& ranks) {
  const int k = static_cast<int>(ranks.size());
  if (k == 0) throw validation_error("ranking must have at least one item");
  std::vector<char> seen(static_cast<std::size_t>(k), 0);
  for (int r : ranks) {
    if (r < 1 || r > k)
      throw validation_error("rank " + std::to_string(r) + " outside 1.." + std::to_string(k));
    if (seen[static_cast<std::size_t>(r - 1)]++)
      throw validation_error("duplicate rank " + std::to_string(r));
  }
}

// Counts inversions of v by merge sort, destroying v's order.
long long count_inversions(std::vector<int>& v, std::vector<int>& scratch) {
  const std::size_t n = v.size();
  long long inv = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, out = lo;
      while (i < mid && j < hi) {
        if (v[i] <= v[j]) {
          scratch[out++] = v[i++];
        } else {
          inv += static_cast<long long>(mid - i);
          scratch[out++] = v[j++];
        }
      }
      while (i < mid) scratch[out++] = v[i++];
      while (j < hi) scratch[out++] = v[j++];
      std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
                scratch.begin() + static_cast<std::ptrdiff_t>(hi),
                v.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inv;
}

}  // namespace

Permutation::Permutation(std::vector<int> ranks) : ranks_(std::move(ranks)) {
  check_bijection(ranks_);
}

Permutation Permutation::identity(int k) {
  if (k < 1) throw validation_error("k must be positive");
  std::vector<int> r(static_cast<std::size_t>(k));
  std::iota(r.begin(), r.end(), 1);
  return Permutation(std::move(r), unchecked_tag{});
}

Permutation Permutation::random_uniform(int k, Rng& rng) {
  Permutation p = identity(k);
  rng.shuffle(p.ranks_);
  return p;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(ranks_.size());
  for (int i = 0; i < k(); ++i)
    inv[static_cast<std::size_t>(ranks_[static_cast<std::size_t>(i)] - 1)] = i + 1;
  return Permutation(std::move(inv), unchecked_tag{});
}

Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.k() != b.k()) throw validation_error("composing rankings of different sizes");
  std::vector<int> out(a.ranks_.size());
  for (int i = 1; i <= a.k(); ++i)
    out[static_cast<std::size_t>(i - 1)] = a(b(i));
  return Permutation(std::move(out), Permutation::unchecked_tag{});
}

int kendall_distance(const Permutation& a, const Permutation& b) {
  if (a.k() != b.k()) throw validation_error("distance between rankings of different sizes");
  const int k = a.k();
  // Write a's ranks in the item order that b ranks 1..k; discordant pairs
  // are exactly the inversions of that sequence.
  std::vector<int> seq(static_cast<std::size_t>(k));
  for (int item = 1; item <= k; ++item)
    seq[static_cast<std::size_t>(b(item) - 1)] = a(item);
  std::vector<int> scratch(seq.size());
  return static_cast<int>(count_inversions(seq, scratch));
}

int hamming_distance(const Permutation& a, const Permutation& b) {
  if (a.k() != b.k()) throw validation_error("distance between rankings of different sizes");
  int d = 0;
  for (int i = 1; i <= a.k(); ++i) d += a(i) != b(i);
  return d;
}

int distance(const Permutation& a, const Permutation& b, DistanceKind kind) {
  return kind == DistanceKind::kendall ? kendall_distance(a, b) : hamming_distance(a, b);
}

int max_distance(int k, DistanceKind kind) {
  if (k < 1) throw validation_error("k must be positive");
  return kind == DistanceKind::kendall ? k * (k - 1) / 2 : k;
}

PartialRanking::PartialRanking(std::vector<int> entries) : entries_(std::move(entries)) {
  const int k = static_cast<int>(entries_.size());
  if (k == 0) throw validation_error("ranking must have at least one item");
  std::vector<char> seen(static_cast<std::size_t>(k), 0);
  for (int r : entries_) {
    if (r == missing) {
      ++n_missing_;
      continue;
    }
    if (r < 1 || r > k)
      throw validation_error("rank " + std::to_string(r) + " outside 1.." + std::to_string(k));
    if (seen[static_cast<std::size_t>(r - 1)]++)
      throw validation_error("duplicate rank " + std::to_string(r));
  }
}

PartialRanking::PartialRanking(const Permutation& full) : entries_(full.ranks()), n_missing_(0) {}

std::vector<int> PartialRanking::missing_items() const {
  std::vector<int> items;
  items.reserve(static_cast<std::size_t>(n_missing_));
  for (int i = 1; i <= k(); ++i)
    if (entry(i) == missing) items.push_back(i);
  return items;
}

std::vector<int> PartialRanking::free_ranks() const {
  std::vector<char> used(static_cast<std::size_t>(k()) + 1, 0);
  for (int r : entries_)
    if (r != missing) used[static_cast<std::size_t>(r)] = 1;
  std::vector<int> free;
  free.reserve(static_cast<std::size_t>(n_missing_));
  for (int r = 1; r <= k(); ++r)
    if (!used[static_cast<std::size_t>(r)]) free.push_back(r);
  return free;
}

Permutation PartialRanking::as_permutation() const {
  if (!complete()) throw validation_error("ranking has missing entries");
  return Permutation(entries_, Permutation::unchecked_tag{});
}

std::vector<Permutation> PartialRanking::enumerate_completions(int max_missing) const {
  if (n_missing_ > max_missing)
    throw validation_error("refusing to enumerate " + std::to_string(n_missing_) +
                           "! completions (limit " + std::to_string(max_missing) + " missing)");
  const std::vector<int> items = missing_items();
  std::vector<int> ranks = free_ranks();
  std::vector<Permutation> out;
  std::size_t count = 1;
  for (std::size_t i = 2; i <= ranks.size(); ++i) count *= i;
  out.reserve(count);
  // ranks starts sorted, so std::next_permutation walks assignments in
  // lexicographic order.
  std::vector<int> filled = entries_;
  do {
    for (std::size_t j = 0; j < items.size(); ++j)
      filled[static_cast<std::size_t>(items[j] - 1)] = ranks[j];
    out.push_back(Permutation(filled, Permutation::unchecked_tag{}));
  } while (std::next_permutation(ranks.begin(), ranks.end()));
  return out;
}

Permutation PartialRanking::random_completion(Rng& rng) const {
  const std::vector<int> items = missing_items();
  std::vector<int> ranks = free_ranks();
  rng.shuffle(ranks);
  std::vector<int> filled = entries_;
  for (std::size_t j = 0; j < items.size(); ++j)
    filled[static_cast<std::size_t>(items[j] - 1)] = ranks[j];
  return Permutation(std::move(filled), Permutation::unchecked_tag{});
}

}  // namespace rgarch
