#pragma once

#include <cstdint>
#include <initializer_list>

namespace mixem {

/// Counter-based 64-bit generator with a frozen algorithm identity
/// (SplitMix64: golden-gamma state increment, mix64 output finalizer).
/// Seeded streams must stay bit-stable across releases, so the generator
/// and every distribution built on top of it are spelled out here rather
/// than delegated to <random>:
///   - uniform:   top 53 bits of the next output, scaled to [0, 1)
///   - normal:    Box-Muller on two uniforms, second value cached
///   - laplacian: inverse CDF of one uniform
/// Distinct streams are derived by folding a path of integers into the
/// master seed with mix64 (see derive()).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double next_double();

  /// Standard normal deviate.
  double next_normal();

  /// Unit-scale, zero-location Laplacian deviate.
  double next_laplace();

  /// Uniform index in {0, ..., n-1}; n >= 1.
  int next_index(int n);

  static std::uint64_t mix64(std::uint64_t z);
  static std::uint64_t derive(std::uint64_t master,
                              std::initializer_list<std::uint64_t> path);

 private:
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mixem
