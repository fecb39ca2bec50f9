#ifndef PTPROC_ERROR_HPP
#define PTPROC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ptproc {

// Precondition or validation failure on user-supplied values.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dominated CFTP did not coalesce before the horizon cap.
class HorizonExceeded : public std::runtime_error {
 public:
  HorizonExceeded(const std::string& what, double horizon)
      : std::runtime_error(what), horizon_(horizon) {}
  double horizon() const noexcept { return horizon_; }

 private:
  double horizon_;
};

// Brute-force oracle truncation bound is above the declared tolerance.
class TailBoundViolation : public std::runtime_error {
 public:
  TailBoundViolation(const std::string& what, double bound)
      : std::runtime_error(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

}  // namespace ptproc

#endif  // PTPROC_ERROR_HPP
