// Independent reference implementations used to check the library. Nothing
// here calls into the code under test except the Model/Statistic interfaces.
#ifndef PTPROC_TESTS_REFERENCE_HPP
#define PTPROC_TESTS_REFERENCE_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "ptproc/models.hpp"

namespace reftest {

struct Pt {
  double x, y;
};

inline int ref_pairs(const std::vector<Pt>& p, double r) {
  int c = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      if (std::hypot(p[i].x - p[j].x, p[i].y - p[j].y) <= r) ++c;
    }
  }
  return c;
}

inline double ref_strauss_log_h(const std::vector<Pt>& p, double beta, double gamma, double r, double alpha = 0.0) {
  double v = static_cast<double>(p.size()) * std::log(beta) + ref_pairs(p, r) * std::log(gamma);
  for (const Pt& q : p) v -= alpha * q.y * q.y;
  return v;
}

struct RefOracle {
  double mu;
  double se;
  std::vector<double> dist;  // P(n(X) = k)
};

// E_f[n(X)] for a Strauss process on [lo, hi]^2 by the truncated series with
// plain Monte Carlo per order. Uses its own generator and pair counting.
inline RefOracle ref_strauss_count_oracle(double lo, double hi, double beta, double gamma, double r, int n_max,
                                          int draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  const double area = (hi - lo) * (hi - lo);
  // z_n = area^n / n! * beta^n * E[gamma^D] ; mu = sum n z_n / sum z_n.
  std::vector<double> z(n_max + 1), zvar(n_max + 1, 0.0);
  z[0] = 1.0;
  double coef = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    coef *= area * beta / n;
    double s = 0.0, s2 = 0.0;
    std::vector<Pt> p(n);
    for (int j = 0; j < draws; ++j) {
      for (auto& q : p) q = {u(gen), u(gen)};
      const double g = std::pow(gamma, ref_pairs(p, r));
      s += g;
      s2 += g * g;
    }
    const double m = s / draws;
    z[n] = coef * m;
    zvar[n] = coef * coef * (s2 / draws - m * m) / draws;
  }
  double num = 0.0, den = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    num += n * z[n];
    den += z[n];
  }
  const double mu = num / den;
  // Orders are independent: d mu / d z_n = (n - mu) / den.
  double var = 0.0;
  for (int n = 1; n <= n_max; ++n) var += (n - mu) * (n - mu) * zvar[n] / (den * den);
  RefOracle out{mu, std::sqrt(var), {}};
  for (int n = 0; n <= n_max; ++n) out.dist.push_back(z[n] / den);
  return out;
}

// Upper-tail p-value of a chi-square goodness-of-fit test; cells with
// expectation below min_expected are pooled into their neighbour.
inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& probs, double total,
                           double min_expected = 5.0) {
  std::vector<double> o, e;
  double ao = 0.0, ae = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    ao += k < observed.size() ? observed[k] : 0.0;
    ae += probs[k] * total;
    if (ae >= min_expected) {
      o.push_back(ao);
      e.push_back(ae);
      ao = ae = 0.0;
    }
  }
  for (std::size_t k = probs.size(); k < observed.size(); ++k) ao += observed[k];
  if (!e.empty()) {
    o.back() += ao;
    e.back() += ae;
  }
  double stat = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) stat += (o[k] - e[k]) * (o[k] - e[k]) / e[k];
  const double df = static_cast<double>(e.size()) - 1.0;
  if (df < 1.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), stat));
}

// h scaled by a positive constant: identical Papangelou intensities.
class ScaledModel : public ptproc::Model {
 public:
  ScaledModel(std::shared_ptr<const ptproc::Model> base, double log_c)
      : Model(base->window()), base_(std::move(base)), log_c_(log_c) {}
  double log_h(const ptproc::PointPattern& x) const override { return base_->log_h(x) + log_c_; }
  double log_papangelou(const ptproc::PointPattern& x, std::span<const double> xi) const override {
    return base_->log_papangelou(x, xi);
  }
  using Model::log_papangelou;
  double log_phi(std::span<const double> xi) const override { return base_->log_phi(xi); }
  double phi_integral() const override { return base_->phi_integral(); }
  ptproc::Point sample_phi_proposal(ptproc::Rng& rng) const override { return base_->sample_phi_proposal(rng); }
  double interaction_range() const override { return base_->interaction_range(); }
  bool repulsive() const override { return base_->repulsive(); }
  std::string describe() const override { return "scaled " + base_->describe(); }

 private:
  std::shared_ptr<const ptproc::Model> base_;
  double log_c_;
};

}  // namespace reftest

#endif
