#include "ptproc/ptproc.h"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ptproc/error.hpp"
#include "ptproc/harness.hpp"
#include "ptproc/poisson.hpp"

struct ptproc_model {
  std::shared_ptr<const ptproc::Model> impl;
};

struct ptproc_statistic {
  std::shared_ptr<const ptproc::Statistic> impl;
};

struct ptproc_pattern {
  ptproc::PointPattern impl;
};

struct ptproc_mh_chain {
  std::shared_ptr<const ptproc::Model> model;
  ptproc::MhConfig cfg;
  ptproc::Rng rng;
  ptproc::MhChainState state;
  std::uint64_t steps = 0;
};

namespace {

thread_local std::string last_error;

template <class Fn>
ptproc_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return PTPROC_OK;
  } catch (const ptproc::InvalidArgument& e) {
    last_error = e.what();
    return PTPROC_ERR_INVALID_ARGUMENT;
  } catch (const ptproc::HorizonExceeded& e) {
    last_error = e.what();
    return PTPROC_ERR_HORIZON_EXCEEDED;
  } catch (const ptproc::TailBoundViolation& e) {
    last_error = e.what();
    return PTPROC_ERR_TAIL_BOUND;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PTPROC_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return PTPROC_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw ptproc::InvalidArgument(what);
}

ptproc::Window make_window(size_t dim, const double* lower, const double* upper) {
  require(lower != nullptr && upper != nullptr, "window bounds must not be null");
  return ptproc::Window(std::span<const double>(lower, dim), std::span<const double>(upper, dim));
}

ptproc::EngineKind to_engine(ptproc_engine e) {
  switch (e) {
    case PTPROC_ENGINE_AIS: return ptproc::EngineKind::ais;
    case PTPROC_ENGINE_MH: return ptproc::EngineKind::mh;
    case PTPROC_ENGINE_CFTP: return ptproc::EngineKind::cftp;
  }
  throw ptproc::InvalidArgument("unknown engine");
}

ptproc_engine from_engine(ptproc::EngineKind e) {
  switch (e) {
    case ptproc::EngineKind::ais: return PTPROC_ENGINE_AIS;
    case ptproc::EngineKind::mh: return PTPROC_ENGINE_MH;
    case ptproc::EngineKind::cftp: return PTPROC_ENGINE_CFTP;
  }
  return PTPROC_ENGINE_AIS;
}

ptproc::MhConfig to_mh(const ptproc_mh_config& c) {
  return {c.p_birth, static_cast<std::size_t>(c.burn_in), static_cast<std::size_t>(c.thin), c.initial_rho};
}

ptproc::CftpConfig to_cftp(const ptproc_cftp_config& c) { return {c.t_max, c.initial_horizon, false}; }

ptproc::EngineSettings to_settings(const ptproc_engine_config& c) {
  ptproc::EngineSettings s;
  s.ais.rho0 = c.ais.rho0;
  s.ais.m_rho = c.ais.m_rho;
  s.ais.M_rho = c.ais.M_rho;
  s.ais.n1 = c.ais.n1;
  s.ais.n_t = c.ais.n_t;
  s.ais.eta1 = c.ais.eta1;
  s.ais.eta2 = c.ais.eta2;
  s.ais.max_steps = c.ais.max_steps;
  s.ais.min_steps = c.ais.min_steps;
  s.mh = to_mh(c.mh);
  s.cftp = to_cftp(c.cftp);
  s.seed = c.seed;
  s.threads = c.threads;
  s.min_samples = c.min_samples;
  s.max_samples = c.max_samples;
  return s;
}

void fill_report(const ptproc::EstimateReport& r, ptproc_report* out) {
  out->mu_hat = r.mu_hat;
  out->se = r.se;
  out->has_rho_final = r.rho_final.has_value() ? 1 : 0;
  out->rho_final = r.rho_final.value_or(std::numeric_limits<double>::quiet_NaN());
  out->steps = r.steps;
  out->n_total = r.n_total;
  out->wall_seconds = r.wall_seconds;
  out->time_variance = r.time_variance;
  out->stop_reason = r.stop_reason == ptproc::StopReason::converged ? PTPROC_STOP_CONVERGED : PTPROC_STOP_MAX_STEPS;
}

}  // namespace

extern "C" {

const char* ptproc_version(void) { return "0.1.0"; }

const char* ptproc_last_error(void) { return last_error.c_str(); }

const char* ptproc_status_name(ptproc_status status) {
  switch (status) {
    case PTPROC_OK: return "ok";
    case PTPROC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PTPROC_ERR_HORIZON_EXCEEDED: return "horizon_exceeded";
    case PTPROC_ERR_TAIL_BOUND: return "tail_bound";
    case PTPROC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

ptproc_status ptproc_pattern_create(size_t dim, const double* lower, const double* upper, ptproc_pattern** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new ptproc_pattern{ptproc::PointPattern(make_window(dim, lower, upper))};
  });
}

void ptproc_pattern_destroy(ptproc_pattern* pattern) { delete pattern; }

ptproc_status ptproc_pattern_add_point(ptproc_pattern* pattern, const double* coords) {
  return guarded([&] {
    require(pattern != nullptr && coords != nullptr, "pattern and coords must not be null");
    pattern->impl.push_back(ptproc::Point(std::span<const double>(coords, pattern->impl.dim())));
  });
}

size_t ptproc_pattern_size(const ptproc_pattern* pattern) { return pattern ? pattern->impl.size() : 0; }

size_t ptproc_pattern_dim(const ptproc_pattern* pattern) { return pattern ? pattern->impl.dim() : 0; }

const double* ptproc_pattern_coords(const ptproc_pattern* pattern) {
  return pattern ? pattern->impl.flat().data() : nullptr;
}

ptproc_status ptproc_model_strauss_create(size_t dim, const double* lower, const double* upper, double beta,
                                          double gamma, double r, ptproc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    auto m = std::make_shared<ptproc::StraussModel>(make_window(dim, lower, upper), ptproc::StraussParams{beta, gamma, r});
    *out = new ptproc_model{std::move(m)};
  });
}

ptproc_status ptproc_model_inhom_strauss_create(size_t dim, const double* lower, const double* upper, double beta,
                                                double gamma, double r, double alpha, ptproc_model** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    auto m = std::make_shared<ptproc::InhomStraussModel>(make_window(dim, lower, upper),
                                                         ptproc::InhomStraussParams{beta, gamma, r, alpha});
    *out = new ptproc_model{std::move(m)};
  });
}

void ptproc_model_destroy(ptproc_model* model) { delete model; }

ptproc_status ptproc_model_log_h(const ptproc_model* model, const ptproc_pattern* x, double* out) {
  return guarded([&] {
    require(model && x && out, "arguments must not be null");
    require(x->impl.window() == model->impl->window(), "pattern window differs from model window");
    *out = model->impl->log_h(x->impl);
  });
}

ptproc_status ptproc_model_log_papangelou(const ptproc_model* model, const ptproc_pattern* x, const double* xi,
                                          double* out) {
  return guarded([&] {
    require(model && x && xi && out, "arguments must not be null");
    require(x->impl.window() == model->impl->window(), "pattern window differs from model window");
    *out = model->impl->log_papangelou(x->impl, std::span<const double>(xi, x->impl.dim()));
  });
}

double ptproc_model_phi_integral(const ptproc_model* model) {
  return model ? model->impl->phi_integral() : std::numeric_limits<double>::quiet_NaN();
}

ptproc_status ptproc_statistic_papangelou_origin_create(const ptproc_model* model, ptproc_statistic** out) {
  return guarded([&] {
    require(model && out, "arguments must not be null");
    *out = new ptproc_statistic{ptproc::k_papangelou_origin(model->impl)};
  });
}

ptproc_status ptproc_statistic_boundary_count_create(double band, ptproc_statistic** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new ptproc_statistic{ptproc::k_boundary_count(band)};
  });
}

ptproc_status ptproc_statistic_point_count_create(ptproc_statistic** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = new ptproc_statistic{ptproc::k_point_count()};
  });
}

void ptproc_statistic_destroy(ptproc_statistic* statistic) { delete statistic; }

ptproc_status ptproc_statistic_evaluate(const ptproc_statistic* statistic, const ptproc_pattern* x, double* out) {
  return guarded([&] {
    require(statistic && x && out, "arguments must not be null");
    *out = statistic->impl->evaluate(x->impl);
  });
}

void ptproc_engine_config_default(ptproc_engine_config* cfg) {
  if (!cfg) return;
  const ptproc::EngineSettings s;
  cfg->ais = {s.ais.rho0, s.ais.m_rho, s.ais.M_rho, s.ais.n1, s.ais.n_t,
              s.ais.eta1, s.ais.eta2,  s.ais.max_steps, s.ais.min_steps};
  cfg->mh = {s.mh.p_birth, s.mh.burn_in, s.mh.thin, s.mh.initial_rho};
  cfg->cftp = {s.cftp.t_max, s.cftp.initial_horizon};
  cfg->seed = s.seed;
  cfg->threads = s.threads;
  cfg->min_samples = s.min_samples;
  cfg->max_samples = s.max_samples;
}

ptproc_status ptproc_eta1_from_confidence(double epsilon, double alpha, double* out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    *out = ptproc::eta1_from_confidence(epsilon, alpha);
  });
}

ptproc_status ptproc_estimate(ptproc_engine engine, const ptproc_model* model, const ptproc_statistic* statistic,
                              double target_rel_se, const ptproc_engine_config* cfg, ptproc_ais_trace_fn trace,
                              void* trace_user, ptproc_report* out) {
  return guarded([&] {
    require(model && statistic && cfg && out, "arguments must not be null");
    ptproc::AisTrace cb;
    if (trace) {
      cb = [trace, trace_user](const ptproc::AisTraceRecord& r) {
        const ptproc_ais_trace_record rec{r.t, r.rho_hat, r.mu_hat, r.sigma2_hat, r.n_total};
        trace(&rec, trace_user);
      };
    }
    const auto r = ptproc::estimate(to_engine(engine), *model->impl, *statistic->impl, target_rel_se,
                                    to_settings(*cfg), cb);
    fill_report(r, out);
  });
}

ptproc_status ptproc_replicate(ptproc_engine engine, const ptproc_model* model, const ptproc_statistic* statistic,
                               uint64_t budget, uint64_t replications, double reference_mu,
                               const ptproc_engine_config* cfg, ptproc_replication_summary* out) {
  return guarded([&] {
    require(model && statistic && cfg && out, "arguments must not be null");
    const auto s = ptproc::replicate(to_engine(engine), *model->impl, *statistic->impl, budget, replications,
                                     reference_mu, to_settings(*cfg));
    *out = {s.replications, s.reference, s.mean, s.empirical_variance, s.mean_reported_variance, s.coverage};
  });
}

void ptproc_oracle_spec_default(ptproc_oracle_spec* spec) {
  if (!spec) return;
  const ptproc::OracleSpec s;
  *spec = {s.n_max, s.mc_points, s.seed, s.batches, s.tail_tolerance, s.threads};
}

ptproc_status ptproc_oracle(const ptproc_model* model, const ptproc_statistic* statistic,
                            const ptproc_oracle_spec* spec, ptproc_oracle_result* out) {
  return guarded([&] {
    require(model && statistic && spec && out, "arguments must not be null");
    const ptproc::OracleSpec s{spec->n_max, spec->mc_points, spec->seed, spec->batches, spec->tail_tolerance,
                               spec->threads};
    out->tail_bound = ptproc::oracle_tail_bound(*model->impl, s.n_max);
    out->mu = std::numeric_limits<double>::quiet_NaN();
    out->mc_se = std::numeric_limits<double>::quiet_NaN();
    const auto r = ptproc::brute_force_expectation(*model->impl, *statistic->impl, s);
    *out = {r.mu, r.tail_bound, r.mc_se};
  });
}

const char* ptproc_benchmark_csv_header(void) { return ptproc::kBenchmarkCsvHeader; }

ptproc_status ptproc_benchmark(const ptproc_benchmark_case* cases, size_t n_cases, const ptproc_engine* engines,
                               size_t n_engines, double target_rel_se, const ptproc_engine_config* cfg,
                               ptproc_benchmark_row* rows_out) {
  return guarded([&] {
    require(cfg != nullptr, "cfg must not be null");
    require(n_cases == 0 || (cases && engines && rows_out), "arguments must not be null");
    std::vector<ptproc::BenchmarkCase> cs;
    for (size_t i = 0; i < n_cases; ++i) {
      require(cases[i].model && cases[i].statistic, "benchmark case needs model and statistic");
      cs.push_back({std::to_string(i), cases[i].model->impl, cases[i].statistic->impl, cases[i].beta, cases[i].gamma});
    }
    std::vector<ptproc::EngineKind> es;
    for (size_t i = 0; i < n_engines; ++i) es.push_back(to_engine(engines[i]));
    const auto rows = ptproc::benchmark(cs, es, target_rel_se, to_settings(*cfg));
    for (size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      rows_out[i] = {from_engine(r.engine), std::stoul(r.label), r.beta, r.gamma, r.mu_hat, r.se,
                     r.wall_seconds, r.n_samples, r.time_variance, r.tv_ratio_vs_ais};
    }
  });
}

ptproc_status ptproc_sample_poisson(size_t dim, const double* lower, const double* upper, double rho, uint64_t seed,
                                    uint64_t index, ptproc_pattern** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be null");
    ptproc::Rng rng(ptproc::derive_seed(seed, ptproc::stream_tag("poisson"), index));
    *out = new ptproc_pattern{ptproc::sample_poisson(make_window(dim, lower, upper), rho, rng)};
  });
}

ptproc_status ptproc_sample_cftp(const ptproc_model* model, const ptproc_cftp_config* cfg, uint64_t seed,
                                 uint64_t index, ptproc_pattern** out) {
  return guarded([&] {
    require(model && cfg && out, "arguments must not be null");
    ptproc::Rng rng(ptproc::derive_seed(seed, ptproc::stream_tag("cftp"), index));
    *out = new ptproc_pattern{ptproc::cftp_sample(*model->impl, rng, to_cftp(*cfg)).pattern};
  });
}

ptproc_status ptproc_mh_chain_create(const ptproc_model* model, const ptproc_mh_config* cfg, uint64_t seed,
                                     ptproc_mh_chain** out) {
  return guarded([&] {
    require(model && cfg && out, "arguments must not be null");
    const ptproc::MhConfig mc = to_mh(*cfg);
    ptproc::validate(mc);
    ptproc::Rng rng(ptproc::derive_seed(seed, ptproc::stream_tag("mh")));
    auto state = ptproc::mh_initial_state(*model->impl, mc, rng);
    *out = new ptproc_mh_chain{model->impl, mc, rng, std::move(state), 0};
  });
}

void ptproc_mh_chain_destroy(ptproc_mh_chain* chain) { delete chain; }

ptproc_status ptproc_mh_chain_advance(ptproc_mh_chain* chain, uint64_t steps) {
  return guarded([&] {
    require(chain != nullptr, "chain must not be null");
    for (uint64_t i = 0; i < steps; ++i) ptproc::mh_step(chain->state, *chain->model, chain->cfg, chain->rng);
    chain->steps += steps;
  });
}

size_t ptproc_mh_chain_count(const ptproc_mh_chain* chain) { return chain ? chain->state.x.size() : 0; }

uint64_t ptproc_mh_chain_steps(const ptproc_mh_chain* chain) { return chain ? chain->steps : 0; }

ptproc_status ptproc_mh_chain_pattern(const ptproc_mh_chain* chain, ptproc_pattern** out) {
  return guarded([&] {
    require(chain && out, "arguments must not be null");
    *out = new ptproc_pattern{chain->state.x};
  });
}

}  // extern "C"
