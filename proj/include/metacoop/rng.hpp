#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "metacoop/check.hpp"

namespace metacoop {

// Deterministic random stream keyed by (seed, purpose, index).
//
// Streams are derived statelessly, so any episode's stream can be
// reconstructed from its key alone. This keeps results independent of how
// episodes are scheduled across threads or lockstep batches. The generator
// is xoshiro256++ seeded via splitmix64; distributions are hand-rolled so
// draws are identical across platforms and standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
    std::uint64_t key = mix(mix(seed ^ 0x9e3779b97f4a7c15ull, hash_str(purpose)), index);
    for (auto& word : state_) {
      key += 0x9e3779b97f4a7c15ull;
      word = splitmix(key);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint32_t next_below(std::uint32_t n) {
    check(n > 0, "RngStream::next_below: n must be positive");
    // Multiply-shift bounded draw (Lemire), debiased by rejection.
    while (true) {
      std::uint64_t x = next_u64() >> 32;
      std::uint64_t m = x * n;
      if ((m & 0xffffffffull) >= (static_cast<std::uint64_t>(-n) % n) || n == 1) {
        return static_cast<std::uint32_t>(m >> 32);
      }
    }
  }

  // Standard normal via Box-Muller. Draws two uniforms per call.
  double next_gaussian() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  static std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
  }

  std::uint64_t state_[4];
};

}  // namespace metacoop
