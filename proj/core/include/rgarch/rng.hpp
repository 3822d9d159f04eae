#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rgarch {

/// Deterministic random source.
///
/// Wraps std::mt19937_64 but implements all distributions by hand, because
/// the standard library leaves <random> distribution algorithms unspecified
/// and we promise bit-identical streams for a given seed across platforms
/// and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on {0, ..., n-1}, unbiased via rejection.  Requires n >= 1.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform on {lo, ..., hi} inclusive.  Requires lo <= hi.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; good avalanche for seed mixing.
inline std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent child seed from a master seed and a stream index.
/// Used to give replications, EM iterations and imputation rows their own
/// streams so that changing one consumer never reshuffles another.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix_u64(mix_u64(master) ^ mix_u64(stream + 0x51ed2701ab7f3a4dULL));
}

/// Two-index variant for (iteration, row) style substreams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

}  // namespace rgarch
