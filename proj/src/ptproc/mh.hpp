#ifndef PTPROC_MH_HPP
#define PTPROC_MH_HPP

#include <cstddef>
#include <vector>

#include "ptproc/models.hpp"
#include "ptproc/report.hpp"
#include "ptproc/rng.hpp"

namespace ptproc {

struct MhConfig {
  double p_birth = 0.5;
  std::size_t burn_in = 3000;
  std::size_t thin = 200;
  // Intensity of the initial Poisson state; <= 0 selects c* / (3 |S|).
  double initial_rho = 0.0;
};

void validate(const MhConfig& cfg);
double initial_rho(const Model& m, const MhConfig& cfg);

struct MhChainState {
  PointPattern x;
  double log_h = 0.0;  // cached model.log_h(x)
};

enum class MhMove { birth_accepted, birth_rejected, death_accepted, death_rejected, death_at_empty };

// Hastings ratio of adding xi to x, log r_b(x, xi), with birth proposal phi/c*
// and uniform death selection 1/n(x + xi).
double log_birth_ratio(const Model& m, const PointPattern& x, std::span<const double> xi, double p_birth);
// log r_d(x, eta) = -log r_b(x \ eta, eta) for eta = point `index` of x.
double log_death_ratio(const Model& m, const PointPattern& x, std::size_t index, double p_birth);

MhChainState mh_initial_state(const Model& m, const MhConfig& cfg, Rng& rng);

/// One birth-death proposal. A death proposed at the empty pattern is
/// rejected, which keeps the proposal mix fixed and f stationary.
MhMove mh_step(MhChainState& s, const Model& m, const MhConfig& cfg, Rng& rng);

struct MhRun {
  std::vector<double> values;
  EstimateReport report;
};

/// burn_in steps, then n_samples retained states spaced `thin` steps apart.
/// Standard error treats the retained values as independent.
MhRun mh_run(const Model& m, const Statistic& k, const MhConfig& cfg, std::size_t n_samples, Rng& rng);

}  // namespace ptproc

#endif  // PTPROC_MH_HPP
