#include "ptproc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "ptproc/error.hpp"
#include "ptproc/parallel.hpp"

namespace ptproc {

namespace {

constexpr std::uint64_t kMhTag = stream_tag("mh");
constexpr std::uint64_t kCftpTag = stream_tag("cftp");
constexpr std::uint64_t kOracleTag = stream_tag("oracle");
constexpr std::uint64_t kReplicateTag = stream_tag("replicate");
constexpr std::uint64_t kBenchmarkTag = stream_tag("benchmark");

// Welford mean / variance with the i.i.d. standard error.
class RunningMean {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double se() const {
    if (n_ < 2) return 0.0;
    const auto n = static_cast<double>(n_);
    return std::sqrt(m2_ / (n - 1.0) / n);
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

bool target_met(const RunningMean& acc, double target, std::uint64_t min_samples) {
  return acc.count() >= std::max<std::uint64_t>(2, min_samples) && acc.se() <= target * std::abs(acc.mean());
}

EstimateReport finish(const RunningMean& acc, std::uint64_t steps, StopReason reason, const Stopwatch& clock) {
  EstimateReport r;
  r.mu_hat = acc.mean();
  r.se = acc.se();
  r.steps = steps;
  r.n_total = acc.count();
  r.stop_reason = reason;
  set_wall_time(r, clock.seconds());
  return r;
}

// Sequential MH estimate; target <= 0 means "exactly max_count samples".
EstimateReport mh_estimate(const Model& m, const Statistic& k, double target, std::uint64_t min_count,
                           std::uint64_t max_count, const EngineSettings& s) {
  Stopwatch clock;
  Rng rng(derive_seed(s.seed, kMhTag));
  MhChainState state = mh_initial_state(m, s.mh, rng);
  std::uint64_t steps = 0;
  for (std::size_t i = 0; i < s.mh.burn_in; ++i, ++steps) mh_step(state, m, s.mh, rng);
  RunningMean acc;
  for (;;) {
    for (std::size_t i = 0; i < s.mh.thin; ++i, ++steps) mh_step(state, m, s.mh, rng);
    acc.add(k.evaluate(state.x));
    if (target > 0.0 && target_met(acc, target, min_count)) {
      return finish(acc, steps, StopReason::converged, clock);
    }
    if (acc.count() >= max_count) return finish(acc, steps, StopReason::max_steps, clock);
  }
}

// CFTP draws are independent: draw j uses substream (seed, "cftp", j). They
// are produced in parallel blocks but consumed strictly in index order, so
// the stopping index and every reported number are thread-count invariant.
EstimateReport cftp_estimate(const Model& m, const Statistic& k, double target, std::uint64_t min_count,
                             std::uint64_t max_count, const EngineSettings& s) {
  Stopwatch clock;
  validate(s.cftp);
  const std::uint64_t block = std::max(1u, s.threads);
  RunningMean acc;
  std::uint64_t next = 0;
  for (;;) {
    const std::uint64_t count = std::min(block, max_count - next);
    std::vector<double> values(count);
    std::vector<std::exception_ptr> errors(count);
    parallel_for(count, s.threads, [&](std::size_t i) {
      try {
        Rng rng(derive_seed(s.seed, kCftpTag, next + i));
        values[i] = k.evaluate(cftp_sample(m, rng, s.cftp).pattern);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (std::uint64_t i = 0; i < count; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      acc.add(values[i]);
      if (target > 0.0 && target_met(acc, target, min_count)) {
        return finish(acc, acc.count(), StopReason::converged, clock);
      }
      if (acc.count() >= max_count) return finish(acc, acc.count(), StopReason::max_steps, clock);
    }
    next += count;
  }
}

double log_factorial(std::uint32_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::ais: return "AIS";
    case EngineKind::mh: return "MH";
    case EngineKind::cftp: return "CFTP";
  }
  return "?";
}

std::optional<EngineKind> parse_engine(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ais") return EngineKind::ais;
  if (lower == "mh") return EngineKind::mh;
  if (lower == "cftp") return EngineKind::cftp;
  return std::nullopt;
}

void validate(const EngineSettings& s) {
  validate(s.mh);
  validate(s.cftp);
  if (s.min_samples < 2) throw InvalidArgument("min_samples must be at least 2");
  if (s.max_samples < s.min_samples) throw InvalidArgument("max_samples must be >= min_samples");
}

EstimateReport estimate(EngineKind engine, const Model& m, const Statistic& k, double target_rel_se,
                        const EngineSettings& settings, const AisTrace& trace) {
  if (!(target_rel_se > 0.0) || !std::isfinite(target_rel_se)) {
    throw InvalidArgument("target_rel_se must be positive");
  }
  validate(settings);
  switch (engine) {
    case EngineKind::ais: {
      AisConfig cfg = settings.ais;
      cfg.eta1 = target_rel_se * target_rel_se;
      return ais_run(m, k, cfg, {settings.seed, settings.threads}, trace);
    }
    case EngineKind::mh:
      return mh_estimate(m, k, target_rel_se, settings.min_samples, settings.max_samples, settings);
    case EngineKind::cftp:
      return cftp_estimate(m, k, target_rel_se, settings.min_samples, settings.max_samples, settings);
  }
  throw InvalidArgument("unknown engine");
}

EstimateReport estimate_budget(EngineKind engine, const Model& m, const Statistic& k, std::uint64_t budget,
                               const EngineSettings& settings) {
  if (budget < 2) throw InvalidArgument("budget must be at least 2");
  validate(settings);
  switch (engine) {
    case EngineKind::ais:
      return ais_run_budget(m, k, settings.ais, {settings.seed, settings.threads}, budget);
    case EngineKind::mh:
      return mh_estimate(m, k, 0.0, budget, budget, settings);
    case EngineKind::cftp:
      return cftp_estimate(m, k, 0.0, budget, budget, settings);
  }
  throw InvalidArgument("unknown engine");
}

double oracle_tail_bound(const Model& m, std::uint32_t n_max) {
  const double c = m.phi_integral();
  // Sum the Poisson(c) pmf directly over the tail; terms decay
  // geometrically once k exceeds c.
  double tail = 0.0;
  const double log_c = std::log(c);
  for (std::uint32_t k = n_max + 1; k < n_max + 100000; ++k) {
    const double term = std::exp(-c + k * log_c - log_factorial(k));
    tail += term;
    if (static_cast<double>(k) > c && term < tail * 1e-17) break;
  }
  return tail;
}

std::vector<OracleResult> brute_force_expectation(const Model& m, std::span<const Statistic* const> ks,
                                                  const OracleSpec& spec) {
  if (spec.batches < 2) throw InvalidArgument("oracle needs at least two batches");
  if (spec.mc_points < spec.batches) throw InvalidArgument("oracle needs mc_points >= batches");
  if (ks.empty()) throw InvalidArgument("oracle needs at least one statistic");
  const double tail = oracle_tail_bound(m, spec.n_max);
  if (!(tail < spec.tail_tolerance)) {
    throw TailBoundViolation("oracle tail bound " + std::to_string(tail) + " exceeds tolerance " +
                                 std::to_string(spec.tail_tolerance) + " at n_max=" + std::to_string(spec.n_max),
                             tail);
  }
  const Window& w = m.window();
  const std::size_t n_orders = spec.n_max + 1;
  const std::size_t n_stats = ks.size();
  const std::uint64_t per_batch = spec.mc_points / spec.batches;

  // Per batch and order: sum of h, and sums of K h for each statistic.
  std::vector<double> h_sum(spec.batches * n_orders, 0.0);
  std::vector<double> kh_sum(spec.batches * n_orders * n_stats, 0.0);

  parallel_for(spec.batches, spec.threads, [&](std::size_t b) {
    PointPattern x(w);
    x.reserve(spec.n_max);
    for (std::uint32_t n = 1; n <= spec.n_max; ++n) {
      double hs = 0.0;
      std::vector<double> khs(n_stats, 0.0);
      for (std::uint64_t j = 0; j < per_batch; ++j) {
        Rng rng(derive_seed(spec.seed, kOracleTag, n, b * per_batch + j));
        x.clear();
        for (std::uint32_t i = 0; i < n; ++i) x.push_back_unchecked(uniform_point(w, rng).coords());
        const double h = std::exp(m.log_h(x));
        hs += h;
        for (std::size_t s = 0; s < n_stats; ++s) khs[s] += ks[s]->evaluate(x) * h;
      }
      h_sum[b * n_orders + n] = hs;
      for (std::size_t s = 0; s < n_stats; ++s) kh_sum[(b * n_orders + n) * n_stats + s] = khs[s];
    }
  });

  // Order weights |S|^n / n! (the common e^{-|S|} cancels in every ratio).
  std::vector<double> weight(n_orders);
  const double log_area = std::log(w.area());
  for (std::uint32_t n = 0; n < n_orders; ++n) weight[n] = std::exp(n * log_area - log_factorial(n));

  const PointPattern empty(w);
  const auto per = static_cast<double>(per_batch);
  std::vector<double> denom(spec.batches, 0.0);
  for (std::uint32_t b = 0; b < spec.batches; ++b) {
    denom[b] = weight[0];
    for (std::uint32_t n = 1; n < n_orders; ++n) denom[b] += weight[n] * h_sum[b * n_orders + n] / per;
  }
  double denom_mean = 0.0;
  for (double d : denom) denom_mean += d;
  denom_mean /= spec.batches;

  std::vector<double> dist(n_orders, 0.0);
  dist[0] = weight[0];
  for (std::uint32_t n = 1; n < n_orders; ++n) {
    double total = 0.0;
    for (std::uint32_t b = 0; b < spec.batches; ++b) total += h_sum[b * n_orders + n];
    dist[n] = weight[n] * total / (per * spec.batches);
  }
  for (double& p : dist) p /= denom_mean;

  std::vector<OracleResult> results;
  results.reserve(n_stats);
  for (std::size_t s = 0; s < n_stats; ++s) {
    const double k_empty = ks[s]->evaluate(empty);
    std::vector<double> num(spec.batches, 0.0);
    double num_mean = 0.0;
    for (std::uint32_t b = 0; b < spec.batches; ++b) {
      num[b] = weight[0] * k_empty;
      for (std::uint32_t n = 1; n < n_orders; ++n) {
        num[b] += weight[n] * kh_sum[(b * n_orders + n) * n_stats + s] / per;
      }
      num_mean += num[b];
    }
    num_mean /= spec.batches;
    const double mu = num_mean / denom_mean;
    // Delta method for a ratio of batch means.
    double ss = 0.0;
    for (std::uint32_t b = 0; b < spec.batches; ++b) {
      const double resid = num[b] - mu * denom[b];
      ss += resid * resid;
    }
    const double nb = spec.batches;
    const double mc_se = std::sqrt(ss / (nb * (nb - 1.0))) / denom_mean;
    results.push_back({mu, tail, mc_se, dist});
  }
  return results;
}

OracleResult brute_force_expectation(const Model& m, const Statistic& k, const OracleSpec& spec) {
  const Statistic* ks[] = {&k};
  return brute_force_expectation(m, std::span<const Statistic* const>(ks), spec).front();
}

ReplicationSummary replicate(EngineKind engine, const Model& m, const Statistic& k, std::uint64_t budget,
                             std::uint64_t replications, double reference_mu, const EngineSettings& settings) {
  if (replications < 2) throw InvalidArgument("replicate needs at least two replications");
  ReplicationSummary out;
  out.replications = replications;
  out.reference = reference_mu;
  out.reports.resize(replications);
  std::vector<std::exception_ptr> errors(replications);
  parallel_for(replications, settings.threads, [&](std::size_t r) {
    EngineSettings s = settings;
    s.seed = derive_seed(settings.seed, kReplicateTag, r);
    s.threads = 1;
    try {
      out.reports[r] = estimate_budget(engine, m, k, budget, s);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  });
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  RunningMean acc;
  double reported = 0.0;
  std::uint64_t covered = 0;
  for (const auto& r : out.reports) {
    acc.add(r.mu_hat);
    reported += r.se * r.se;
    if (std::abs(r.mu_hat - reference_mu) <= 1.959963984540054 * r.se) ++covered;
  }
  const auto R = static_cast<double>(replications);
  out.mean = acc.mean();
  out.empirical_variance = acc.se() * acc.se() * R;
  out.mean_reported_variance = reported / R;
  out.coverage = static_cast<double>(covered) / R;
  return out;
}

std::vector<BenchmarkRow> benchmark(std::span<const BenchmarkCase> cases, std::span<const EngineKind> engines,
                                    double target_rel_se, const EngineSettings& settings) {
  if (!cases.empty() && std::find(engines.begin(), engines.end(), EngineKind::ais) == engines.end()) {
    throw InvalidArgument("benchmark: AIS must be included as the ratio base");
  }
  std::vector<BenchmarkRow> rows;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const BenchmarkCase& c = cases[i];
    const std::size_t first = rows.size();
    double ais_tv = 0.0;
    for (EngineKind e : engines) {
      EngineSettings s = settings;
      s.seed = derive_seed(settings.seed, kBenchmarkTag, i, static_cast<std::uint64_t>(e));
      const EstimateReport r = estimate(e, *c.model, *c.statistic, target_rel_se, s);
      BenchmarkRow row;
      row.label = c.label;
      row.engine = e;
      row.beta = c.beta;
      row.gamma = c.gamma;
      row.mu_hat = r.mu_hat;
      row.se = r.se;
      row.wall_seconds = r.wall_seconds;
      row.n_samples = r.n_total;
      row.time_variance = r.time_variance;
      if (e == EngineKind::ais) ais_tv = r.time_variance;
      rows.push_back(row);
    }
    for (std::size_t j = first; j < rows.size(); ++j) {
      rows[j].tv_ratio_vs_ais = rows[j].engine == EngineKind::ais ? 1.0 : rows[j].time_variance / ais_tv;
    }
  }
  return rows;
}

}  // namespace ptproc
