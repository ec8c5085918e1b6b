#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ct {

/// Seedable generator with platform-independent output.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The standard distributions are implementation-defined, so the transforms
/// are spelled out here: uniform() takes the top 53 bits of one draw,
/// normal() is the Marsaglia polar method (pairs are cached), and below()
/// rejects draws from the biased tail.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates from the back: for i = n-1 .. 1 swap i with below(i + 1).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Independent per-task seed from (master, label, a, b).
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace ct
