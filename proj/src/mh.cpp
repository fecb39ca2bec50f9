#include "ptproc/mh.hpp"

#include <cmath>

#include "ptproc/error.hpp"
#include "ptproc/poisson.hpp"

namespace ptproc {

void validate(const MhConfig& cfg) {
  if (!(cfg.p_birth > 0.0 && cfg.p_birth < 1.0)) throw InvalidArgument("mh.p_birth must lie in (0, 1)");
  if (cfg.thin == 0) throw InvalidArgument("mh.thin must be positive");
  if (!std::isfinite(cfg.initial_rho)) throw InvalidArgument("mh.initial_rho must be finite");
}

double initial_rho(const Model& m, const MhConfig& cfg) {
  return cfg.initial_rho > 0.0 ? cfg.initial_rho : m.phi_integral() / (3.0 * m.window().area());
}

double log_birth_ratio(const Model& m, const PointPattern& x, std::span<const double> xi, double p_birth) {
  const double n_after = static_cast<double>(x.size() + 1);
  return m.log_papangelou(x, xi) - std::log(n_after) + std::log1p(-p_birth) - m.log_phi(xi) +
         std::log(m.phi_integral()) - std::log(p_birth);
}

double log_death_ratio(const Model& m, const PointPattern& x, std::size_t index, double p_birth) {
  const Point eta = x.point(index);
  return -log_birth_ratio(m, x.without(index), eta.coords(), p_birth);
}

MhChainState mh_initial_state(const Model& m, const MhConfig& cfg, Rng& rng) {
  MhChainState s{sample_poisson(m.window(), initial_rho(m, cfg), rng), 0.0};
  s.log_h = m.log_h(s.x);
  return s;
}

MhMove mh_step(MhChainState& s, const Model& m, const MhConfig& cfg, Rng& rng) {
  const double log_c = std::log(m.phi_integral());
  const double log_odds = std::log1p(-cfg.p_birth) - std::log(cfg.p_birth);
  if (rng.uniform() < cfg.p_birth) {
    const Point xi = m.sample_phi_proposal(rng);
    const double log_lambda = m.log_papangelou(s.x, xi);
    const double log_rb = log_lambda - std::log(static_cast<double>(s.x.size() + 1)) + log_odds -
                          m.log_phi(xi.coords()) + log_c;
    if (log_rb >= 0.0 || std::log(rng.uniform()) < log_rb) {
      s.x.push_back_unchecked(xi.coords());
      s.log_h += log_lambda;
      return MhMove::birth_accepted;
    }
    return MhMove::birth_rejected;
  }
  const std::size_t n = s.x.size();
  if (n == 0) return MhMove::death_at_empty;
  const std::size_t idx = rng.index(n);
  const Point eta = s.x.point(idx);
  s.x.erase_swap(idx);
  // s.x is now x \ eta.
  const double log_lambda = m.log_papangelou(s.x, eta);
  const double log_rd = -(log_lambda - std::log(static_cast<double>(n)) + log_odds -
                          m.log_phi(eta.coords()) + log_c);
  if (log_rd >= 0.0 || std::log(rng.uniform()) < log_rd) {
    s.log_h -= log_lambda;
    return MhMove::death_accepted;
  }
  s.x.push_back_unchecked(eta.coords());
  return MhMove::death_rejected;
}

MhRun mh_run(const Model& m, const Statistic& k, const MhConfig& cfg, std::size_t n_samples, Rng& rng) {
  validate(cfg);
  if (n_samples < 2) throw InvalidArgument("mh_run needs at least two samples");
  Stopwatch clock;
  MhChainState s = mh_initial_state(m, cfg, rng);
  std::uint64_t steps = 0;
  for (std::size_t i = 0; i < cfg.burn_in; ++i, ++steps) mh_step(s, m, cfg, rng);
  MhRun run;
  run.values.reserve(n_samples);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t j = 0; j < n_samples; ++j) {
    for (std::size_t i = 0; i < cfg.thin; ++i, ++steps) mh_step(s, m, cfg, rng);
    const double v = k.evaluate(s.x);
    run.values.push_back(v);
    const double delta = v - mean;
    mean += delta / static_cast<double>(j + 1);
    m2 += delta * (v - mean);
  }
  const auto n = static_cast<double>(n_samples);
  run.report.mu_hat = mean;
  run.report.se = std::sqrt(m2 / (n - 1.0) / n);
  run.report.steps = steps;
  run.report.n_total = n_samples;
  run.report.stop_reason = StopReason::max_steps;
  set_wall_time(run.report, clock.seconds());
  return run;
}

}  // namespace ptproc
