#include "ptproc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "ptproc/error.hpp"

namespace ptproc {

namespace {

void check_dim(std::size_t dim) {
  if (dim == 0 || dim > kMaxDim) {
    throw InvalidArgument("dimension must be in [1, " + std::to_string(kMaxDim) +
                          "], got " + std::to_string(dim));
  }
}

// Largest squared distance t with sqrt(t) <= r, so that `d2 <= t` is the same
// test as `distance <= r` without a square root per pair.
double squared_threshold(double r) noexcept {
  double t = r * r;
  while (t > 0.0 && std::sqrt(t) > r) t = std::nextafter(t, 0.0);
  for (;;) {
    const double up = std::nextafter(t, std::numeric_limits<double>::infinity());
    if (std::sqrt(up) > r) break;
    t = up;
  }
  return t;
}

double squared_distance(const double* a, const double* b, std::size_t dim) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

template <std::size_t D>
double squared_distance_fixed(const double* a, const double* b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < D; ++k) {
    const double e = a[k] - b[k];
    s += e * e;
  }
  return s;
}

template <std::size_t D>
std::size_t naive_pairs(const double* c, std::size_t n, double t) noexcept {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (squared_distance_fixed<D>(c + i * D, c + j * D) <= t) ++count;
    }
  }
  return count;
}

template <std::size_t D>
std::size_t grid_pairs(const double* c, std::size_t n, const Window& w, double r, double t) {
  // Cells per axis: side >= r, and total cell count bounded so tiny r does
  // not allocate a huge grid. Each axis gets one empty padding cell on both
  // ends so neighbour lookups need no bounds checks.
  std::array<std::size_t, D> cells{};
  const std::size_t cap = std::max<std::size_t>(16, n);
  for (std::size_t k = 0; k < D; ++k) {
    const double m = std::floor(w.side(k) / r);
    cells[k] = m < 1.0 ? 1 : static_cast<std::size_t>(std::min(m, 1e6));
  }
  for (;;) {
    std::size_t inner = 1;
    for (std::size_t k = 0; k < D; ++k) inner *= cells[k];
    if (inner <= cap) break;
    auto widest = std::max_element(cells.begin(), cells.end());
    *widest = std::max<std::size_t>(1, *widest / 2);
  }
  std::array<std::size_t, D> stride{};
  std::size_t total = 1;
  for (std::size_t k = D; k-- > 0;) {
    stride[k] = total;
    total *= cells[k] + 2;
  }

  thread_local std::vector<std::uint32_t> cell_of;
  thread_local std::vector<std::uint32_t> start;
  thread_local std::vector<double> sorted;
  cell_of.resize(n);
  start.assign(total + 1, 0);
  sorted.resize(n * D);

  std::array<double, D> scale{};
  for (std::size_t k = 0; k < D; ++k) scale[k] = static_cast<double>(cells[k]) / w.side(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lin = 0;
    for (std::size_t k = 0; k < D; ++k) {
      const double rel = (c[i * D + k] - w.lower(k)) * scale[k];
      const auto ik = std::min(static_cast<std::size_t>(std::max(0.0, rel)), cells[k] - 1);
      lin += (ik + 1) * stride[k];
    }
    cell_of[i] = static_cast<std::uint32_t>(lin);
    ++start[lin + 1];
  }
  for (std::size_t b = 0; b < total; ++b) start[b + 1] += start[b];
  {
    thread_local std::vector<std::uint32_t> fill;
    fill.assign(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) std::copy_n(c + i * D, D, sorted.begin() + fill[cell_of[i]]++ * D);
  }

  // Offsets whose first nonzero component is positive: each unordered pair
  // of adjacent cells is visited once.
  std::array<std::size_t, 40> forward{};
  std::size_t n_forward = 0;
  std::size_t codes = 1;
  for (std::size_t k = 0; k < D; ++k) codes *= 3;
  for (std::size_t code = 0; code < codes; ++code) {
    std::size_t rem = code;
    std::ptrdiff_t delta = 0;
    int first = 0;
    for (std::size_t k = 0; k < D; ++k) {
      const int off = static_cast<int>(rem % 3) - 1;
      rem /= 3;
      if (first == 0) first = off;
      delta += off * static_cast<std::ptrdiff_t>(stride[k]);
    }
    if (first > 0) forward[n_forward++] = static_cast<std::size_t>(delta);
  }

  const double* sc = sorted.data();
  std::size_t count = 0;
  for (std::size_t lin = stride[0]; lin + stride[0] < total; ++lin) {
    const std::size_t b0 = start[lin], b1 = start[lin + 1];
    if (b0 == b1) continue;
    for (std::size_t a = b0; a + 1 < b1; ++a) {
      for (std::size_t b = a + 1; b < b1; ++b) {
        if (squared_distance_fixed<D>(sc + a * D, sc + b * D) <= t) ++count;
      }
    }
    for (std::size_t f = 0; f < n_forward; ++f) {
      const std::size_t o = lin + forward[f];
      const std::size_t e0 = start[o], e1 = start[o + 1];
      for (std::size_t a = b0; a < b1; ++a) {
        for (std::size_t b = e0; b < e1; ++b) {
          if (squared_distance_fixed<D>(sc + a * D, sc + b * D) <= t) ++count;
        }
      }
    }
  }
  return count;
}
template <class Fn>
auto dispatch_dim(std::size_t d, Fn&& fn) {
  switch (d) {
    case 1: return fn(std::integral_constant<std::size_t, 1>{});
    case 2: return fn(std::integral_constant<std::size_t, 2>{});
    case 3: return fn(std::integral_constant<std::size_t, 3>{});
    default: return fn(std::integral_constant<std::size_t, 4>{});
  }
}

}  // namespace

Point::Point(std::initializer_list<double> coords)
    : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords) : dim_(coords.size()) {
  check_dim(dim_);
  std::copy(coords.begin(), coords.end(), c_.begin());
}

Point Point::origin(std::size_t dim) {
  check_dim(dim);
  Point p;
  p.dim_ = dim;
  return p;
}

bool operator==(const Point& a, const Point& b) noexcept {
  return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
}

Window::Window(std::span<const double> lower, std::span<const double> upper)
    : dim_(lower.size()) {
  check_dim(dim_);
  if (upper.size() != dim_) throw InvalidArgument("window lower/upper dimension mismatch");
  area_ = 1.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
      throw InvalidArgument("window requires finite lower[" + std::to_string(i) +
                            "] < upper[" + std::to_string(i) + "]");
    }
    lower_[i] = lower[i];
    upper_[i] = upper[i];
    area_ *= upper[i] - lower[i];
  }
  if (!(area_ > 0.0) || !std::isfinite(area_)) throw InvalidArgument("window area must be positive and finite");
}

Window::Window(std::initializer_list<double> lower, std::initializer_list<double> upper)
    : Window(std::span<const double>(lower.begin(), lower.size()),
             std::span<const double>(upper.begin(), upper.size())) {}

Window Window::cube(double lo, double hi, std::size_t dim) {
  check_dim(dim);
  std::array<double, kMaxDim> l{}, u{};
  l.fill(lo);
  u.fill(hi);
  return Window(std::span<const double>(l.data(), dim), std::span<const double>(u.data(), dim));
}

bool Window::contains(std::span<const double> p) const noexcept {
  if (p.size() != dim_) return false;
  for (std::size_t i = 0; i < dim_; ++i) {
    if (!(p[i] >= lower_[i] && p[i] <= upper_[i])) return false;
  }
  return true;
}

bool Window::contains(const Point& p) const noexcept { return contains(p.coords()); }

bool operator==(const Window& a, const Window& b) noexcept {
  return a.dim_ == b.dim_ && std::equal(a.lower_.begin(), a.lower_.begin() + a.dim_, b.lower_.begin()) &&
         std::equal(a.upper_.begin(), a.upper_.begin() + a.dim_, b.upper_.begin());
}

PointPattern::PointPattern(const Window& window, std::initializer_list<Point> points)
    : window_(window) {
  reserve(points.size());
  for (const Point& p : points) push_back(p);
}

PointPattern::PointPattern(const Window& window, std::vector<double> flat)
    : window_(window), coords_(std::move(flat)) {
  const std::size_t d = dim();
  if (d == 0 || coords_.size() % d != 0) throw InvalidArgument("coordinate count is not a multiple of the dimension");
  for (std::size_t i = 0; i < coords_.size(); i += d) {
    if (!window_.contains(std::span<const double>(coords_.data() + i, d))) {
      throw InvalidArgument("point lies outside the window");
    }
  }
}

void PointPattern::push_back(const Point& p) {
  if (p.dim() != dim()) throw InvalidArgument("point dimension does not match window");
  if (!window_.contains(p)) throw InvalidArgument("point lies outside the window");
  push_back_unchecked(p.coords());
}

void PointPattern::push_back_unchecked(std::span<const double> p) {
  coords_.insert(coords_.end(), p.begin(), p.end());
}

void PointPattern::erase_swap(std::size_t i) noexcept {
  const std::size_t d = dim();
  const std::size_t last = size() - 1;
  if (i != last) {
    std::copy_n(coords_.begin() + static_cast<std::ptrdiff_t>(last * d), d,
                coords_.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  coords_.resize(last * d);
}

PointPattern PointPattern::with(const Point& p) const {
  PointPattern out(*this);
  out.push_back(p);
  return out;
}

PointPattern PointPattern::without(std::size_t i) const {
  PointPattern out(*this);
  out.coords_.erase(out.coords_.begin() + static_cast<std::ptrdiff_t>(i * dim()),
                    out.coords_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim()));
  return out;
}

bool operator==(const PointPattern& a, const PointPattern& b) noexcept {
  return a.window_ == b.window_ && a.coords_ == b.coords_;
}

double area(const Window& w) noexcept { return w.area(); }

double distance(const Point& p, const Point& q) {
  if (p.dim() != q.dim()) throw InvalidArgument("distance: dimension mismatch");
  return std::sqrt(squared_distance(p.coords().data(), q.coords().data(), p.dim()));
}

std::size_t close_pair_count_naive(const PointPattern& x, double r) {
  const double t = squared_threshold(r);
  return dispatch_dim(x.dim(), [&](auto D) { return naive_pairs<D()>(x.flat().data(), x.size(), t); });
}

std::size_t close_pair_count_grid(const PointPattern& x, double r) {
  if (x.size() < 2) return 0;
  const double t = squared_threshold(r);
  return dispatch_dim(x.dim(), [&](auto D) { return grid_pairs<D()>(x.flat().data(), x.size(), x.window(), r, t); });
}

std::size_t close_pair_count(const PointPattern& x, double r) {
  return x.size() < kGridThreshold ? close_pair_count_naive(x, r) : close_pair_count_grid(x, r);
}

std::size_t neighbor_count(const PointPattern& x, std::span<const double> xi, double r) {
  const std::size_t n = x.size();
  const std::size_t d = x.dim();
  if (n == 0) return 0;
  if (xi.size() != d) throw InvalidArgument("neighbor_count: dimension mismatch");
  const double t = squared_threshold(r);
  const double* c = x.flat().data();
  return dispatch_dim(d, [&](auto D) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (squared_distance_fixed<D()>(c + i * D(), xi.data()) <= t) ++count;
    }
    return count;
  });
}

Point uniform_point(const Window& w, Rng& rng) noexcept {
  Point p = Point::origin(w.dim());
  for (std::size_t k = 0; k < w.dim(); ++k) p[k] = w.lower(k) + w.side(k) * rng.uniform();
  return p;
}

}  // namespace ptproc
