#include "ptproc/poisson.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "ptproc/error.hpp"

namespace ptproc {

namespace {

std::uint64_t poisson_inversion(double mean, Rng& rng) {
  const double p0 = std::exp(-mean);
  for (;;) {
    const double u = rng.uniform();
    double p = p0;
    double cdf = p0;
    std::uint64_t k = 0;
    // The cap only triggers when rounding leaves cdf stuck below u; redraw.
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    if (k < 1000) return k;
  }
}

std::uint64_t poisson_ptrd(double mean, Rng& rng) {
  const double smu = std::sqrt(mean);
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + kf * log_mean - std::lgamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace

std::uint64_t poisson_count(double mean, Rng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidArgument("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  return mean < kInversionLimit ? poisson_inversion(mean, rng) : poisson_ptrd(mean, rng);
}

PointPattern sample_poisson(const Window& w, double rho, Rng& rng) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("Poisson intensity must be positive and finite");
  const std::uint64_t n = poisson_count(rho * w.area(), rng);
  const std::size_t d = w.dim();
  std::vector<double> flat(n * d);
  for (std::size_t i = 0; i < flat.size(); i += d) {
    for (std::size_t k = 0; k < d; ++k) flat[i + k] = w.lower(k) + w.side(k) * rng.uniform();
  }
  return PointPattern(w, std::move(flat));
}

double log_g(std::size_t n, double area, double rho) {
  return (1.0 - rho) * area + static_cast<double>(n) * std::log(rho);
}

double log_g(const PointPattern& x, double rho) { return log_g(x.size(), x.window().area(), rho); }

}  // namespace ptproc
