#ifndef PTPROC_POISSON_HPP
#define PTPROC_POISSON_HPP

#include <cstdint>

#include "ptproc/geometry.hpp"
#include "ptproc/rng.hpp"

namespace ptproc {

// Poisson(mean) variate: sequential inversion below kInversionLimit, PTRD
// transformed rejection (Hormann 1993) at or above it.
inline constexpr double kInversionLimit = 30.0;
std::uint64_t poisson_count(double mean, Rng& rng);

/// Homogeneous Poisson process Poi(S, rho): n ~ Poisson(rho |S|), then n
/// i.i.d. uniform points.
PointPattern sample_poisson(const Window& w, double rho, Rng& rng);

/// log g(x; rho) = (1 - rho)|S| + n(x) log rho: density of Poi(S, rho)
/// relative to Poi(S, 1).
double log_g(const PointPattern& x, double rho);
double log_g(std::size_t n, double area, double rho);

}  // namespace ptproc

#endif  // PTPROC_POISSON_HPP
