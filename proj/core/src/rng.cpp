#include "mixem/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mixem {

std::uint64_t Rng::mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_normal_;
  }
  // Box-Muller; u1 is shifted away from 0 so the log stays finite.
  double u1 = next_double();
  double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_normal_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double Rng::next_laplace() {
  // Inverse CDF: u in (-1/2, 1/2], x = -sign(u) ln(1 - 2|u|).
  const double u = next_double() - 0.5;
  if (u >= 0.0) {
    return -std::log1p(-2.0 * u);
  }
  return std::log1p(2.0 * u);
}

int Rng::next_index(int n) {
  if (n < 1) throw std::invalid_argument("next_index: n must be >= 1");
  // Rejection-free is overkill here; modulo bias is < 2^-32 for the
  // small n used in this codebase, but reject anyway to keep the
  // stream well defined for any n.
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return static_cast<int>(v % bound);
}

std::uint64_t Rng::derive(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master ^ 0xa0761d6478bd642fULL);
  for (const std::uint64_t part : path) {
    h = mix64(h ^ mix64(part ^ 0xe7037ed1a0b428dbULL));
  }
  return h;
}

}  // namespace mixem
