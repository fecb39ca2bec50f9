#ifndef PTPROC_REPORT_HPP
#define PTPROC_REPORT_HPP

#include <chrono>
#include <cstdint>
#include <optional>

namespace ptproc {

enum class StopReason { converged, max_steps };

/// Outcome of one estimation run, common to all engines.
struct EstimateReport {
  double mu_hat = 0.0;
  double se = 0.0;
  std::optional<double> rho_final;  // AIS only
  std::uint64_t steps = 0;
  std::uint64_t n_total = 0;
  double wall_seconds = 0.0;
  double time_variance = 0.0;  // se^2 * wall_seconds
  StopReason stop_reason = StopReason::converged;
};

inline void set_wall_time(EstimateReport& r, double seconds) {
  r.wall_seconds = seconds;
  r.time_variance = r.se * r.se * seconds;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ptproc

#endif  // PTPROC_REPORT_HPP
