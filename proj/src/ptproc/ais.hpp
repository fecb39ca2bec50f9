#ifndef PTPROC_AIS_HPP
#define PTPROC_AIS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "ptproc/models.hpp"
#include "ptproc/report.hpp"
#include "ptproc/signed_log_sum.hpp"

namespace ptproc {

/// Settings of the adaptive importance sampler. Sample sizes follow
/// n1 > n_t = n_t = ... so that sum_t n_t / (n^(t))^2 stays finite.
struct AisConfig {
  double rho0 = 0.0;  // <= 0 selects c* / (3 |S|), i.e. beta / 3 for the Strauss families
  double m_rho = 1e-10;
  double M_rho = 1e10;
  std::uint64_t n1 = 500;
  std::uint64_t n_t = 100;
  double eta1 = 0.0025;  // bound on the squared relative standard error
  double eta2 = 0.01;    // bound on the relative change of rho between steps
  std::uint64_t max_steps = 1'000'000;
  std::uint64_t min_steps = 2;  // earliest step at which the stopping rule may fire
  bool adapt = true;            // false keeps rho fixed at rho0
};

void validate(const AisConfig& cfg);
// rho0 resolved against the model (the config default means "beta / 3").
AisConfig resolve(const AisConfig& cfg, const Model& m);
// eta1 = (epsilon / z_{alpha/2})^2 from a relative-error target epsilon held
// with probability 1 - alpha.
double eta1_from_confidence(double epsilon, double alpha);

/// Running sums of Algorithm state, all as signed log sums over every sample
/// drawn so far (j = 1..t, i = 1..n_j).
// Streaming sum of w^2 (K - mu)^2 about the running self-normalised mean,
// with weights held relative to the largest log-weight seen. Same quantity
// as the uncentred expansion, without its cancellation when one weight
// dominates.
class CenteredMoments {
 public:
  void add(double k, double log_w) noexcept;
  double mean() const noexcept { return mean_; }
  // sum w^2 (K - mu)^2 / (sum w)^2
  double spread() const noexcept { return w_sum_ > 0.0 ? s_sum_ / (w_sum_ * w_sum_) : 0.0; }

 private:
  bool started_ = false;
  double log_scale_ = 0.0;
  double w_sum_ = 0.0;  // sum w / e^L
  double mean_ = 0.0;
  double v_sum_ = 0.0;  // sum w^2 / e^2L
  double t_sum_ = 0.0;  // sum w^2 (K - mu) / e^2L
  double s_sum_ = 0.0;  // sum w^2 (K - mu)^2 / e^2L
};

struct AisState {
  std::uint64_t t = 0;
  double rho_hat = 0.0;       // rho_t (after the step), rho_0 before any step
  double prev_rho_hat = 0.0;  // rho_{t-1}
  std::uint64_t n_total = 0;
  SignedLogSum a_kw;     // sum K w
  SignedLogSum a_w;      // sum w
  SignedLogSum a_nkw;    // sum n~ |K| w
  SignedLogSum a_akw;    // sum |K| w
  SignedLogSum a_k2w2;   // sum K^2 w^2
  SignedLogSum a_kw2;    // sum K w^2
  SignedLogSum a_w2;     // sum w^2
  CenteredMoments centered;
  double mu_hat = 0.0;
  double sigma2_hat = 0.0;
};

AisState ais_initial_state(const AisConfig& resolved_cfg);

// Per-sample inputs to the accumulators.
struct AisSampleTerms {
  double k = 0.0;          // K(x)
  double n_tilde = 0.0;    // truncated point count
  double log_w = 0.0;      // log h(x) - log g(x; rho_{t-1})
};

double log_weight(const Model& m, const PointPattern& x, double rho);
double truncated_count(std::size_t n, double m_rho, double M_rho, double area);

void absorb(AisState& s, const AisSampleTerms& terms);
// Closes step t: recomputes mu_t, rho_t (clamped to [m_rho, M_rho]; left
// unchanged while every K seen so far is zero) and sigma^2_t.
void close_step(AisState& s, const AisConfig& cfg, double area);

struct AisStreams {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Draws step t's samples from Poi(S, rho_{t-1}); sample i of step t uses
/// substream (seed, "ais", t, i). Samples are evaluated in parallel and
/// absorbed in index order.
void ais_step(AisState& s, const Model& m, const Statistic& k, const AisConfig& cfg, const AisStreams& streams);

/// Both stopping conditions: squared relative standard error <= eta1 and
/// relative rho change <= eta2, evaluated only from step min_steps on.
bool stopping_check(const AisState& s, const AisConfig& cfg);

struct AisTraceRecord {
  std::uint64_t t;
  double rho_hat;
  double mu_hat;
  double sigma2_hat;
  std::uint64_t n_total;
};
using AisTrace = std::function<void(const AisTraceRecord&)>;

EstimateReport ais_run(const Model& m, const Statistic& k, const AisConfig& cfg, const AisStreams& streams,
                       const AisTrace& trace = {});

// Runs with the stopping rule disabled until at least `budget` samples were drawn.
EstimateReport ais_run_budget(const Model& m, const Statistic& k, const AisConfig& cfg,
                              const AisStreams& streams, std::uint64_t budget);

}  // namespace ptproc

#endif  // PTPROC_AIS_HPP
