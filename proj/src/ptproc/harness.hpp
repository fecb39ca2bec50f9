#ifndef PTPROC_HARNESS_HPP
#define PTPROC_HARNESS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptproc/ais.hpp"
#include "ptproc/cftp.hpp"
#include "ptproc/mh.hpp"
#include "ptproc/models.hpp"
#include "ptproc/report.hpp"

namespace ptproc {

enum class EngineKind { ais, mh, cftp };

std::string to_string(EngineKind e);
std::optional<EngineKind> parse_engine(std::string_view name);

struct EngineSettings {
  AisConfig ais;
  MhConfig mh;
  CftpConfig cftp;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // Sequential stopping for MH and CFTP: at least min_samples values, at most max_samples.
  std::uint64_t min_samples = 20;
  std::uint64_t max_samples = 1'000'000;
};

void validate(const EngineSettings& s);

/// One estimate of E_f[K] at a target relative standard error. AIS runs its
/// own stopping rule with eta1 = target^2; MH and CFTP keep sampling until
/// se / |mu| <= target, with se the i.i.d. standard error of the K values.
EstimateReport estimate(EngineKind engine, const Model& m, const Statistic& k, double target_rel_se,
                        const EngineSettings& settings, const AisTrace& trace = {});

/// Fixed-budget run: AIS draws at least `budget` samples with the stopping
/// rule off; MH retains and CFTP draws exactly `budget` samples.
EstimateReport estimate_budget(EngineKind engine, const Model& m, const Statistic& k, std::uint64_t budget,
                               const EngineSettings& settings);

struct OracleSpec {
  std::uint32_t n_max = 12;
  std::uint64_t mc_points = 1'000'000;
  std::uint64_t seed = 20240611;
  std::uint32_t batches = 100;
  double tail_tolerance = 1e-6;
  unsigned threads = 1;
};

struct OracleResult {
  double mu = 0.0;
  double tail_bound = 0.0;
  double mc_se = 0.0;
  // Estimated P_f(n(X) = k), k = 0..n_max, shared by every statistic of a call.
  std::vector<double> count_distribution;
};

// P(Poisson(c*) > n_max). A locally stable f is stochastically dominated by
// Poi(S, phi), so this bounds the probability mass the truncated series drops.
double oracle_tail_bound(const Model& m, std::uint32_t n_max);

/// Truncated series mu = sum_n |S|^n/n! E_U[K h] / sum_n |S|^n/n! E_U[h],
/// each n-fold integral by plain Monte Carlo over uniform points. Every
/// statistic reuses the same draws. Throws TailBoundViolation when the bound
/// exceeds spec.tail_tolerance.
std::vector<OracleResult> brute_force_expectation(const Model& m, std::span<const Statistic* const> ks,
                                                  const OracleSpec& spec);
OracleResult brute_force_expectation(const Model& m, const Statistic& k, const OracleSpec& spec);

struct ReplicationSummary {
  std::uint64_t replications = 0;
  double reference = 0.0;
  double mean = 0.0;
  double empirical_variance = 0.0;
  double mean_reported_variance = 0.0;  // mean of se^2
  double coverage = 0.0;                // fraction of 95% normal CIs containing the reference
  std::vector<EstimateReport> reports;
};

/// R independent fixed-budget estimates; replication r uses seed
/// derive_seed(settings.seed, "replicate", r).
ReplicationSummary replicate(EngineKind engine, const Model& m, const Statistic& k, std::uint64_t budget,
                             std::uint64_t replications, double reference_mu, const EngineSettings& settings);

struct BenchmarkCase {
  std::string label;
  std::shared_ptr<const Model> model;
  std::shared_ptr<const Statistic> statistic;
  double beta = 0.0;
  double gamma = 0.0;
};

struct BenchmarkRow {
  std::string label;
  EngineKind engine = EngineKind::ais;
  double beta = 0.0;
  double gamma = 0.0;
  double mu_hat = 0.0;
  double se = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t n_samples = 0;
  double time_variance = 0.0;
  double tv_ratio_vs_ais = 0.0;
};

/// One row per (case, engine), in case order then engine order. Engine e on
/// case i is seeded with derive_seed(settings.seed, "benchmark", i, e).
/// AIS must be among the engines; it is the ratio base.
std::vector<BenchmarkRow> benchmark(std::span<const BenchmarkCase> cases, std::span<const EngineKind> engines,
                                    double target_rel_se, const EngineSettings& settings);

inline constexpr const char* kBenchmarkCsvHeader =
    "engine,beta,gamma,mu_hat,se,wall_seconds,n_samples,time_variance,tv_ratio_vs_ais";

}  // namespace ptproc

#endif  // PTPROC_HARNESS_HPP
