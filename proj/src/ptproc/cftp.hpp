#ifndef PTPROC_CFTP_HPP
#define PTPROC_CFTP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ptproc/models.hpp"
#include "ptproc/rng.hpp"

namespace ptproc {

struct CftpConfig {
  std::uint32_t t_max = 20;     // give up once the horizon would exceed 2^t_max
  double initial_horizon = 1.0;  // in units of the unit per-point death rate
  bool check_invariants = false;  // sandwich and monotonicity checks on every event
};

void validate(const CftpConfig& cfg);

/// Path of the dominating spatial birth-death process D on (-T, 0]: births at
/// rate c* with locations ~ phi/c*, unit death rate per point, started in its
/// Poisson(phi) equilibrium. The path is generated backwards from time 0 using
/// time reversibility, so doubling T only appends older events and never
/// touches the stored suffix.
class DominatingTrajectory {
 public:
  // Forward-time event: point `id` is born (birth == true) or dies at `time`.
  struct Event {
    double time;
    std::uint32_t id;
    bool birth;
  };

  static DominatingTrajectory start(const Model& m, double horizon, Rng& rng);

  // (-T, 0] -> (-2T, 0].
  void extend_backward(const Model& m, Rng& rng);

  double horizon() const noexcept { return horizon_; }
  std::size_t dim() const noexcept { return dim_; }
  // Events ordered from time 0 backwards (decreasing time).
  const std::vector<Event>& events() const noexcept { return events_; }
  // Points alive at time -T.
  const std::vector<std::uint32_t>& initial_state() const noexcept { return alive_; }
  std::span<const double> location(std::uint32_t id) const noexcept {
    return {locations_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }
  // Acceptance mark of a birth event; only meaningful for points born in (-T, 0].
  double mark(std::uint32_t id) const noexcept { return marks_[id]; }
  std::size_t point_count() const noexcept { return marks_.size(); }
  // Points alive at time 0.
  std::vector<std::uint32_t> final_state() const;

  // Exact (hex-float) text of all events with time in (-since, 0].
  std::string serialize(double since) const;

 private:
  void simulate_back_to(double target, const Model& m, Rng& rng);
  std::uint32_t new_point(const Point& p);

  std::size_t dim_ = 0;
  double horizon_ = 0.0;
  std::vector<double> locations_;
  std::vector<double> marks_;
  std::vector<Event> events_;
  std::vector<std::uint32_t> alive_;
  std::vector<std::uint32_t> alive_at_zero_;
};

struct SandwichOutcome {
  bool coalesced = false;
  PointPattern lower;  // points ordered by id
  std::size_t upper_size = 0;
};

/// Runs the lower process L (from empty) and upper process U (from D(-T))
/// forward over the trajectory. At a birth (xi, u): U accepts iff
/// u <= lambda(L, xi)/phi(xi) and L accepts iff u <= lambda(U, xi)/phi(xi),
/// both evaluated before insertion. Deaths remove the point from both.
SandwichOutcome run_sandwich(const DominatingTrajectory& d, const Model& m, bool check_invariants);

struct CftpSample {
  PointPattern pattern;
  double horizon = 0.0;
  std::size_t events = 0;
};

/// Exact draw from f for a repulsive, locally stable model via dominated CFTP
/// with horizon doubling. Throws HorizonExceeded past 2^t_max.
CftpSample cftp_sample(const Model& m, Rng& rng, const CftpConfig& cfg = {});

}  // namespace ptproc

#endif  // PTPROC_CFTP_HPP
