#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace arbitrage {

// FNV-1a, 64-bit. Used for stable string hashing (seeds, feature buckets,
// config digests). Fixed constants, byte-order independent.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

// splitmix64 output scrambler (Steele, Lea, Flood 2014).
[[nodiscard]] constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Combines two 64-bit values into a well-mixed one. Deterministic across
// platforms (pure integer arithmetic).
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return detail::splitmix64_finalize(x);
}

// Per-prompt seed: every piece of randomness in a run flows from
// (run_seed, prompt id) through this, so concurrency and scheduling order
// can never change outputs.
[[nodiscard]] constexpr std::uint64_t derive_prompt_seed(std::uint64_t run_seed,
                                                         std::string_view prompt_id) noexcept {
  return mix64(run_seed, fnv1a64(prompt_id));
}

// Tagged sub-stream of a seed, e.g. derive_subseed(s, "gen:alpha:en").
// Distinct tags give independent streams.
[[nodiscard]] constexpr std::uint64_t derive_subseed(std::uint64_t seed,
                                                     std::string_view tag) noexcept {
  return mix64(seed, fnv1a64(tag));
}

// Small deterministic generator (splitmix64 stream). Not for cryptography.
class SeededRng {
 public:
  explicit constexpr SeededRng(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::splitmix64_finalize(state_);
  }

  // Uniform in [0, 1).
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n), unbiased via rejection. n must be > 0.
  std::uint64_t next_below(std::uint64_t n) noexcept {
    for (;;) {
      const std::uint64_t x = next_u64();
      const std::uint64_t r = x % n;
      if (x - r <= ~std::uint64_t{0} - (n - 1)) return r;
    }
  }

  // Standard normal via Box-Muller; consumes two draws per call.
  double next_normal() noexcept {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_double();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace arbitrage
