#ifndef PTPROC_GEOMETRY_HPP
#define PTPROC_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ptproc/rng.hpp"

namespace ptproc {

// Dimension is a runtime value; storage is inline up to this bound so points
// and windows stay cheap to copy in the samplers' inner loops.
inline constexpr std::size_t kMaxDim = 4;

class Point {
 public:
  Point() = default;
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);
  static Point origin(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  double operator[](std::size_t i) const noexcept { return c_[i]; }
  double& operator[](std::size_t i) noexcept { return c_[i]; }
  std::span<const double> coords() const noexcept { return {c_.data(), dim_}; }

  friend bool operator==(const Point& a, const Point& b) noexcept;

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

/// Axis-aligned box S = [lower, upper].
class Window {
 public:
  Window() = default;
  Window(std::span<const double> lower, std::span<const double> upper);
  Window(std::initializer_list<double> lower, std::initializer_list<double> upper);
  // Square [lo, hi]^dim.
  static Window cube(double lo, double hi, std::size_t dim = 2);

  std::size_t dim() const noexcept { return dim_; }
  double lower(std::size_t i) const noexcept { return lower_[i]; }
  double upper(std::size_t i) const noexcept { return upper_[i]; }
  double side(std::size_t i) const noexcept { return upper_[i] - lower_[i]; }
  double area() const noexcept { return area_; }
  bool contains(const Point& p) const noexcept;
  bool contains(std::span<const double> p) const noexcept;

  friend bool operator==(const Window& a, const Window& b) noexcept;

 private:
  std::array<double, kMaxDim> lower_{};
  std::array<double, kMaxDim> upper_{};
  std::size_t dim_ = 0;
  double area_ = 0.0;
};

/// Finite configuration x of points in a window. Points are stored flat,
/// positionally; order carries no meaning for any density or statistic.
class PointPattern {
 public:
  PointPattern() = default;
  explicit PointPattern(const Window& window) : window_(window) {}
  PointPattern(const Window& window, std::initializer_list<Point> points);
  // Takes ownership of packed coordinates (point-major); all must lie in the window.
  PointPattern(const Window& window, std::vector<double> flat);

  const Window& window() const noexcept { return window_; }
  std::size_t dim() const noexcept { return window_.dim(); }
  std::size_t size() const noexcept { return dim() == 0 ? 0 : coords_.size() / dim(); }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> coords(std::size_t i) const noexcept {
    return {coords_.data() + i * dim(), dim()};
  }
  Point point(std::size_t i) const { return Point(coords(i)); }
  std::span<const double> flat() const noexcept { return coords_; }

  // Throws InvalidArgument if p lies outside the window or has the wrong dimension.
  void push_back(const Point& p);
  // Unchecked append for samplers that generate inside the window by construction.
  void push_back_unchecked(std::span<const double> p);
  // Removes point i by moving the last point into its slot.
  void erase_swap(std::size_t i) noexcept;
  void reserve(std::size_t n) { coords_.reserve(n * dim()); }
  void clear() noexcept { coords_.clear(); }

  PointPattern with(const Point& p) const;
  PointPattern without(std::size_t i) const;

  friend bool operator==(const PointPattern& a, const PointPattern& b) noexcept;

 private:
  Window window_;
  std::vector<double> coords_;
};

double area(const Window& w) noexcept;

// Euclidean distance; throws InvalidArgument on dimension mismatch.
double distance(const Point& p, const Point& q);

// Number of unordered pairs at distance <= r. Uses a cell grid of side >= r
// for n >= kGridThreshold and a direct double loop below it.
inline constexpr std::size_t kGridThreshold = 32;
std::size_t close_pair_count(const PointPattern& x, double r);
std::size_t close_pair_count_naive(const PointPattern& x, double r);
std::size_t close_pair_count_grid(const PointPattern& x, double r);

// Number of points of x within distance r of xi (xi itself counts if present).
std::size_t neighbor_count(const PointPattern& x, std::span<const double> xi, double r);
inline std::size_t neighbor_count(const PointPattern& x, const Point& xi, double r) {
  return neighbor_count(x, xi.coords(), r);
}

Point uniform_point(const Window& w, Rng& rng) noexcept;

}  // namespace ptproc

#endif  // PTPROC_GEOMETRY_HPP
