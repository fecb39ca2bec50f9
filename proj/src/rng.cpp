#include "ptproc/rng.hpp"

#include <cmath>

namespace ptproc {

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t z = seed;
  for (auto& word : s_) {
    z += 0x9e3779b97f4a7c15ULL;
    word = mix64(z);
  }
}

double Rng::exponential() noexcept {
  return -std::log1p(-uniform());
}

std::uint64_t Rng::index(std::uint64_t n) noexcept {
  const unsigned __int128 product = static_cast<unsigned __int128>(next()) * n;
  return static_cast<std::uint64_t>(product >> 64);
}

}  // namespace ptproc
