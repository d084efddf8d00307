#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scottlab {

// Malformed input (bad syntax, violated precondition, unachievable request).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A configured search budget bound before an answer was known. Never used to
// report a negative verdict.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

// Deterministic 64-bit generator (splitmix64); all sampling goes through this
// so reports are reproducible from the seed alone.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

}  // namespace scottlab
