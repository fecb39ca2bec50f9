#include "ptproc/ais.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "ptproc/error.hpp"
#include "ptproc/parallel.hpp"
#include "ptproc/poisson.hpp"

namespace ptproc {

namespace {

constexpr std::uint64_t kAisTag = stream_tag("ais");

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

void validate(const AisConfig& cfg) {
  if (!(cfg.m_rho > 0.0) || !(cfg.M_rho >= cfg.m_rho) || !std::isfinite(cfg.M_rho)) {
    throw InvalidArgument("ais: require 0 < m_rho <= M_rho < inf");
  }
  if (cfg.rho0 > 0.0 && (cfg.rho0 < cfg.m_rho || cfg.rho0 > cfg.M_rho)) {
    throw InvalidArgument("ais.rho0 must lie in [m_rho, M_rho]");
  }
  if (cfg.n_t < 1 || cfg.n1 <= cfg.n_t) throw InvalidArgument("ais: require n1 > n_t >= 1");
  if (!(cfg.eta1 > 0.0) || !(cfg.eta2 > 0.0)) throw InvalidArgument("ais: eta1 and eta2 must be positive");
  if (cfg.max_steps < 1) throw InvalidArgument("ais.max_steps must be positive");
}

AisConfig resolve(const AisConfig& cfg, const Model& m) {
  AisConfig out = cfg;
  if (!(out.rho0 > 0.0)) {
    out.rho0 = std::clamp(m.phi_integral() / (3.0 * m.window().area()), cfg.m_rho, cfg.M_rho);
  }
  validate(out);
  return out;
}

double eta1_from_confidence(double epsilon, double alpha) {
  if (!(epsilon > 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("eta1_from_confidence: need epsilon > 0 and alpha in (0, 1)");
  }
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
  return (epsilon / z) * (epsilon / z);
}

AisState ais_initial_state(const AisConfig& cfg) {
  AisState s;
  s.rho_hat = cfg.rho0;
  s.prev_rho_hat = cfg.rho0;
  return s;
}

double log_weight(const Model& m, const PointPattern& x, double rho) { return m.log_h(x) - log_g(x, rho); }

double truncated_count(std::size_t n, double m_rho, double M_rho, double area) {
  if (!(m_rho <= M_rho)) throw InvalidArgument("truncated_count: m_rho > M_rho");
  return std::clamp(static_cast<double>(n), m_rho * area, M_rho * area);
}

void CenteredMoments::add(double k, double log_w) noexcept {
  if (!started_ || log_w > log_scale_) {
    if (started_) {
      const double f = std::exp(log_scale_ - log_w);
      w_sum_ *= f;
      v_sum_ *= f * f;
      t_sum_ *= f * f;
      s_sum_ *= f * f;
    }
    log_scale_ = log_w;
    started_ = true;
  }
  const double w = std::exp(log_w - log_scale_);
  if (w == 0.0) return;
  const double v = w * w;
  w_sum_ += w;
  const double next_mean = mean_ + w * (k - mean_) / w_sum_;
  const double delta = mean_ - next_mean;
  const double dev = k - next_mean;
  s_sum_ += 2.0 * delta * t_sum_ + delta * delta * v_sum_ + v * dev * dev;
  t_sum_ += delta * v_sum_ + v * dev;
  v_sum_ += v;
  mean_ = next_mean;
}

void absorb(AisState& s, const AisSampleTerms& terms) {
  const double lw = terms.log_w;
  const int sk = sign_of(terms.k);
  const double lk = sk == 0 ? 0.0 : std::log(std::abs(terms.k));
  s.a_w.add_log(lw, 1);
  s.a_w2.add_log(2.0 * lw, 1);
  if (sk != 0) {
    s.a_kw.add_log(lk + lw, sk);
    s.a_akw.add_log(lk + lw, 1);
    s.a_nkw.add_log(std::log(terms.n_tilde) + lk + lw, 1);
    s.a_k2w2.add_log(2.0 * (lk + lw), 1);
    s.a_kw2.add_log(lk + 2.0 * lw, sk);
  }
  s.centered.add(terms.k, lw);
  ++s.n_total;
}

void close_step(AisState& s, const AisConfig& cfg, double area) {
  ++s.t;
  s.prev_rho_hat = s.rho_hat;
  const double log_w = s.a_w.log_magnitude();
  s.mu_hat = s.a_kw.sign() * std::exp(s.a_kw.log_magnitude() - log_w);
  if (cfg.adapt && s.a_akw.sign() != 0) {
    const double rho = std::exp(s.a_nkw.log_magnitude() - s.a_akw.log_magnitude()) / area;
    s.rho_hat = std::clamp(rho, cfg.m_rho, cfg.M_rho);
  }
  // sigma^2 = n (sum K^2 w^2 - 2 mu sum K w^2 + mu^2 sum w^2) / (sum w)^2, i.e.
  // n sum w^2 (K - mu)^2 / (sum w)^2, evaluated in centred form.
  const double inner = s.centered.spread();
  s.sigma2_hat = static_cast<double>(s.n_total) * std::max(0.0, inner);
}

void ais_step(AisState& s, const Model& m, const Statistic& k, const AisConfig& cfg, const AisStreams& streams) {
  const std::uint64_t t = s.t + 1;
  const std::uint64_t count = t == 1 ? cfg.n1 : cfg.n_t;
  const double rho = s.rho_hat;
  const Window& w = m.window();
  const double area = w.area();
  std::vector<AisSampleTerms> terms(count);
  parallel_for(count, streams.threads, [&](std::size_t i) {
    Rng rng(derive_seed(streams.seed, kAisTag, t, i));
    const PointPattern x = sample_poisson(w, rho, rng);
    terms[i] = {k.evaluate(x), truncated_count(x.size(), cfg.m_rho, cfg.M_rho, area), log_weight(m, x, rho)};
  });
  for (const AisSampleTerms& term : terms) absorb(s, term);
  close_step(s, cfg, area);
}

bool stopping_check(const AisState& s, const AisConfig& cfg) {
  if (s.t < std::max<std::uint64_t>(1, cfg.min_steps)) return false;
  if (s.mu_hat == 0.0 || s.n_total == 0) return false;
  const double rel_se2 = s.sigma2_hat / (static_cast<double>(s.n_total) * s.mu_hat * s.mu_hat);
  if (!(rel_se2 <= cfg.eta1)) return false;
  return std::abs(s.rho_hat - s.prev_rho_hat) / s.prev_rho_hat <= cfg.eta2;
}

namespace {

EstimateReport make_report(const AisState& s, StopReason reason, double seconds) {
  EstimateReport r;
  r.mu_hat = s.mu_hat;
  r.se = s.n_total > 0 ? std::sqrt(s.sigma2_hat / static_cast<double>(s.n_total)) : 0.0;
  r.rho_final = s.rho_hat;
  r.steps = s.t;
  r.n_total = s.n_total;
  r.stop_reason = reason;
  set_wall_time(r, seconds);
  return r;
}

}  // namespace

EstimateReport ais_run(const Model& m, const Statistic& k, const AisConfig& cfg, const AisStreams& streams,
                       const AisTrace& trace) {
  Stopwatch clock;
  const AisConfig rc = resolve(cfg, m);
  AisState s = ais_initial_state(rc);
  for (;;) {
    ais_step(s, m, k, rc, streams);
    if (trace) trace({s.t, s.rho_hat, s.mu_hat, s.sigma2_hat, s.n_total});
    if (stopping_check(s, rc)) return make_report(s, StopReason::converged, clock.seconds());
    if (s.t >= rc.max_steps) return make_report(s, StopReason::max_steps, clock.seconds());
  }
}

EstimateReport ais_run_budget(const Model& m, const Statistic& k, const AisConfig& cfg,
                              const AisStreams& streams, std::uint64_t budget) {
  Stopwatch clock;
  const AisConfig rc = resolve(cfg, m);
  AisState s = ais_initial_state(rc);
  while (s.n_total < budget) ais_step(s, m, k, rc, streams);
  return make_report(s, StopReason::max_steps, clock.seconds());
}

}  // namespace ptproc
