#include "ptproc/cftp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ptproc/error.hpp"
#include "ptproc/poisson.hpp"

namespace ptproc {

void validate(const CftpConfig& cfg) {
  if (cfg.t_max == 0 || cfg.t_max > 60) throw InvalidArgument("cftp.t_max must lie in [1, 60]");
  if (!(cfg.initial_horizon > 0.0) || !std::isfinite(cfg.initial_horizon)) {
    throw InvalidArgument("cftp.initial_horizon must be positive");
  }
}

std::uint32_t DominatingTrajectory::new_point(const Point& p) {
  const auto id = static_cast<std::uint32_t>(marks_.size());
  locations_.insert(locations_.end(), p.coords().begin(), p.coords().end());
  marks_.push_back(std::nan(""));
  return id;
}

DominatingTrajectory DominatingTrajectory::start(const Model& m, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw InvalidArgument("dominating trajectory horizon must be positive");
  DominatingTrajectory d;
  d.dim_ = m.window().dim();
  const std::uint64_t n0 = poisson_count(m.phi_integral(), rng);
  for (std::uint64_t i = 0; i < n0; ++i) d.alive_.push_back(d.new_point(m.sample_phi_proposal(rng)));
  d.alive_at_zero_ = d.alive_;
  d.simulate_back_to(-horizon, m, rng);
  return d;
}

void DominatingTrajectory::extend_backward(const Model& m, Rng& rng) {
  simulate_back_to(-2.0 * horizon_, m, rng);
}

// Reversed in time, D is again a birth-death process with the same rates: a
// reversed birth is a forward death and a reversed death is a forward birth.
// Exponential clocks are memoryless, so the clock interrupted at the target
// time is simply redrawn on the next extension.
void DominatingTrajectory::simulate_back_to(double target, const Model& m, Rng& rng) {
  const double c = m.phi_integral();
  double t = -horizon_;
  for (;;) {
    const double n = static_cast<double>(alive_.size());
    const double rate = c + n;
    t -= rng.exponential() / rate;
    if (t <= target) break;
    if (rng.uniform() * rate < c) {
      const std::uint32_t id = new_point(m.sample_phi_proposal(rng));
      alive_.push_back(id);
      events_.push_back({t, id, false});
    } else {
      const std::size_t idx = rng.index(alive_.size());
      const std::uint32_t id = alive_[idx];
      alive_[idx] = alive_.back();
      alive_.pop_back();
      marks_[id] = rng.uniform();
      events_.push_back({t, id, true});
    }
  }
  horizon_ = -target;
}

std::vector<std::uint32_t> DominatingTrajectory::final_state() const { return alive_at_zero_; }

std::string DominatingTrajectory::serialize(double since) const {
  std::string out;
  char buf[96];
  for (const Event& e : events_) {
    if (!(e.time > -since)) break;
    std::snprintf(buf, sizeof buf, "%a %c", e.time, e.birth ? 'b' : 'd');
    out += buf;
    for (double v : location(e.id)) {
      std::snprintf(buf, sizeof buf, " %a", v);
      out += buf;
    }
    if (e.birth) {
      std::snprintf(buf, sizeof buf, " %a", marks_[e.id]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

// Pattern plus id bookkeeping so points can be removed by id in O(1).
class TrackedPattern {
 public:
  TrackedPattern(const Window& w, std::size_t ids) : x_(w), slot_(ids, -1) {}

  void insert(std::uint32_t id, std::span<const double> loc) {
    slot_[id] = static_cast<std::int64_t>(ids_.size());
    ids_.push_back(id);
    x_.push_back_unchecked(loc);
  }

  void erase(std::uint32_t id) {
    const std::int64_t s = slot_[id];
    if (s < 0) return;
    const auto si = static_cast<std::size_t>(s);
    const std::uint32_t moved = ids_.back();
    x_.erase_swap(si);
    ids_[si] = moved;
    slot_[moved] = s;
    ids_.pop_back();
    slot_[id] = -1;
  }

  bool contains(std::uint32_t id) const { return slot_[id] >= 0; }
  const PointPattern& pattern() const { return x_; }
  const std::vector<std::uint32_t>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }

 private:
  PointPattern x_;
  std::vector<std::int64_t> slot_;
  std::vector<std::uint32_t> ids_;
};

void check_sandwich(const TrackedPattern& lower, const TrackedPattern& upper) {
  for (std::uint32_t id : lower.ids()) {
    if (!upper.contains(id)) throw std::logic_error("CFTP sandwich invariant violated: L is not a subset of U");
  }
}

}  // namespace

SandwichOutcome run_sandwich(const DominatingTrajectory& d, const Model& m, bool check_invariants) {
#ifndef NDEBUG
  check_invariants = true;
#endif
  const Window& w = m.window();
  TrackedPattern lower(w, d.point_count());
  TrackedPattern upper(w, d.point_count());
  for (std::uint32_t id : d.initial_state()) upper.insert(id, d.location(id));

  const auto& events = d.events();
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    const auto& e = *it;
    if (!e.birth) {
      lower.erase(e.id);
      upper.erase(e.id);
    } else {
      const auto xi = d.location(e.id);
      const double u = d.mark(e.id);
      const double log_phi = m.log_phi(xi);
      const bool to_upper = u <= std::exp(m.log_papangelou(lower.pattern(), xi) - log_phi);
      // lambda(U, .) <= lambda(L, .), so L can only accept what U accepts.
      bool to_lower = false;
      if (to_upper || check_invariants) {
        to_lower = u <= std::exp(m.log_papangelou(upper.pattern(), xi) - log_phi);
      }
      if (check_invariants && to_lower && !to_upper) {
        throw std::logic_error("CFTP monotonicity violated: lower accepted a birth the upper rejected");
      }
      if (to_upper) upper.insert(e.id, xi);
      if (to_lower) lower.insert(e.id, xi);
    }
    if (check_invariants) check_sandwich(lower, upper);
  }

  SandwichOutcome out;
  out.upper_size = upper.size();
  out.coalesced = lower.size() == upper.size();
  std::vector<std::uint32_t> ids = lower.ids();
  std::sort(ids.begin(), ids.end());
  out.lower = PointPattern(w);
  out.lower.reserve(ids.size());
  for (std::uint32_t id : ids) out.lower.push_back_unchecked(d.location(id));
  return out;
}

CftpSample cftp_sample(const Model& m, Rng& rng, const CftpConfig& cfg) {
  validate(cfg);
  if (!m.repulsive()) throw InvalidArgument("dominated CFTP requires a repulsive model");
  const double cap = std::ldexp(1.0, static_cast<int>(cfg.t_max));
  DominatingTrajectory d = DominatingTrajectory::start(m, cfg.initial_horizon, rng);
  for (;;) {
    SandwichOutcome o = run_sandwich(d, m, cfg.check_invariants);
    if (o.coalesced) return {std::move(o.lower), d.horizon(), d.events().size()};
    if (2.0 * d.horizon() > cap) {
      throw HorizonExceeded("CFTP did not coalesce within horizon " + std::to_string(d.horizon()),
                            d.horizon());
    }
    d.extend_backward(m, rng);
  }
}

}  // namespace ptproc
