#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <unordered_map>
#include <vector>

namespace pihc {

// SplitMix64 finalizer. Full-avalanche mixing of a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stateless keyed hash used for process-trace stamps: the stamp of a slot is
// a pure function of (seed, slot), so stamp tables never have to be stored.
constexpr std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t slot) {
  return mix64(mix64(seed ^ 0xd1b54a32d192ed03ULL) + slot * 0x9e3779b97f4a7c15ULL);
}

// Map a 64-bit word to [0, 1) with 53 random bits.
constexpr double unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Counter-based generator. Streams derived from (master seed, stream index)
// are independent regardless of how many draws other streams made, which is
// what keeps multi-worker experiment output byte-identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed)) {}
  Rng(std::uint64_t master, std::uint64_t stream)
      : key_(mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) + stream)) {}

  std::uint64_t next_u64() { return keyed_u64(key_, ++ctr_); }

  double next_unit() { return unit_double(next_u64()); }

  // Unbiased integer in [0, bound). Lemire multiply-shift with rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (lo < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int next_int(int bound) { return static_cast<int>(next_below(static_cast<std::uint64_t>(bound))); }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(std::distance(first, last));
    for (std::uint64_t i = n; i > 1; --i) std::iter_swap(first + (i - 1), first + next_below(i));
  }

  // k distinct values from [0, n), order random. Partial Fisher-Yates on a
  // sparse overlay so n can be large.
  std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k) {
    std::unordered_map<std::uint64_t, std::uint64_t> moved;
    std::vector<std::uint64_t> out;
    out.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) {
      const std::uint64_t j = i + next_below(n - i);
      auto it = moved.find(j);
      const std::uint64_t value = it == moved.end() ? j : it->second;
      auto self = moved.find(i);
      moved[j] = self == moved.end() ? i : self->second;
      out.push_back(value);
    }
    return out;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace pihc
