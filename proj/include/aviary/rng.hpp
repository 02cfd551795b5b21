#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace aviary {

// Counter-based 64-bit generator (splitmix64). Every random decision in the
// toolkit flows through this engine so that identical seeds give identical
// artifacts on any platform; nothing uses std::mt19937 or the distributions
// of <random>, whose sequences are not pinned by the standard.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Finalizer of splitmix64; also used standalone to derive stream seeds.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Independent substream: hash of (seed, stream_id). Tree t of a forest uses
  // stream(seed, t); other consumers tag the id's high bits to stay disjoint.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(mix(seed + kGolden * (stream_id + 1)));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }
  result_type operator()() { return next_u64(); }

  // Unbiased draw in [0, n) (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double real(double lo, double hi) { return lo + (hi - lo) * real(); }

  // Inclusive integer range.
  std::int64_t int_in(std::int64_t lo, std::int64_t hi) {
    assert(lo <= hi);
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return real() < p; }

  // Inverse-CDF exponential with the given rate (events per unit).
  double exponential(double rate) {
    assert(rate > 0);
    return -std::log1p(-real()) / rate;
  }

  // Knuth's product method; adequate for the small means used here.
  std::uint32_t poisson(double mean) {
    assert(mean >= 0);
    if (mean == 0) return 0;
    const double limit = std::exp(-mean);
    std::uint32_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= real();
    } while (p > limit);
    return k - 1;
  }

  // Fisher-Yates, high index down.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values of [0, n) in draw order (partial Fisher-Yates).
  std::vector<int> sample_indices(int k, int n) {
    assert(k >= 0 && k <= n);
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) {
      const int j =
          i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)],
                idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  std::uint64_t state_;
};

// Stream-id tags keeping unrelated consumers of the same user seed apart.
namespace rng_streams {
inline constexpr std::uint64_t kFoldTag = 0x666F6C64ULL << 32;     // "fold"
inline constexpr std::uint64_t kSynthUserTag = 0x75736572ULL << 32;  // "user"
inline constexpr std::uint64_t kSynthLabelTag = 0x6C61626CULL << 32; // "labl"
inline constexpr std::uint64_t kSynthCorruptTag = 0x636F7272ULL << 32; // "corr"
}  // namespace rng_streams

}  // namespace aviary
