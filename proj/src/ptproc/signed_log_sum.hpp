#ifndef PTPROC_SIGNED_LOG_SUM_HPP
#define PTPROC_SIGNED_LOG_SUM_HPP

#include <cmath>
#include <limits>

namespace ptproc {

/// Running sum of signed terms s * exp(a) kept as shift + log|scaled|, where
/// scaled = sum / exp(shift) and shift tracks the largest exponent seen. Terms
/// far below the running maximum lose only what plain summation would.
class SignedLogSum {
 public:
  void add_log(double log_abs, int sign) noexcept {
    if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity()) return;
    const double s = sign > 0 ? 1.0 : -1.0;
    if (!started_) {
      shift_ = log_abs;
      scaled_ = s;
      started_ = true;
    } else if (log_abs > shift_) {
      scaled_ = scaled_ * std::exp(shift_ - log_abs) + s;
      shift_ = log_abs;
    } else {
      scaled_ += s * std::exp(log_abs - shift_);
    }
  }

  void add(double value) noexcept {
    if (value != 0.0) add_log(std::log(std::abs(value)), value > 0 ? 1 : -1);
  }

  int sign() const noexcept { return scaled_ > 0.0 ? 1 : (scaled_ < 0.0 ? -1 : 0); }

  double log_magnitude() const noexcept {
    if (scaled_ == 0.0) return -std::numeric_limits<double>::infinity();
    return shift_ + std::log(std::abs(scaled_));
  }

  // May overflow to +/-inf; the log form is authoritative.
  double value() const noexcept { return sign() * std::exp(log_magnitude()); }

 private:
  double shift_ = 0.0;
  double scaled_ = 0.0;
  bool started_ = false;
};

}  // namespace ptproc

#endif  // PTPROC_SIGNED_LOG_SUM_HPP
