#ifndef PTPROC_MODELS_HPP
#define PTPROC_MODELS_HPP

#include <memory>
#include <string>

#include "ptproc/geometry.hpp"
#include "ptproc/rng.hpp"

namespace ptproc {

/// Unnormalized density h of a locally stable point process on a window,
/// taken with respect to the unit-rate Poisson process. Everything is in
/// log space: log h(empty) == 0, log_papangelou(x, xi) == log h(x + xi) - log h(x),
/// and log_papangelou(x, xi) <= log_phi(xi).
class Model {
 public:
  explicit Model(const Window& window) : window_(window) {}
  virtual ~Model() = default;

  const Window& window() const noexcept { return window_; }

  virtual double log_h(const PointPattern& x) const = 0;
  virtual double log_papangelou(const PointPattern& x, std::span<const double> xi) const = 0;
  double log_papangelou(const PointPattern& x, const Point& xi) const {
    return log_papangelou(x, xi.coords());
  }

  // Stability envelope phi and c* = integral of phi over the window.
  virtual double log_phi(std::span<const double> xi) const = 0;
  double phi(const Point& xi) const;
  virtual double phi_integral() const = 0;
  // Draw from the density phi / c*.
  virtual Point sample_phi_proposal(Rng& rng) const = 0;
  virtual double interaction_range() const = 0;
  // True when log_papangelou(x, xi) is non-increasing as points are added to x.
  virtual bool repulsive() const = 0;
  virtual std::string describe() const = 0;

 private:
  Window window_;
};

struct StraussParams {
  double beta = 0.0;
  double gamma = 1.0;
  double r = 0.1;
};

struct InhomStraussParams {
  double beta = 0.0;
  double gamma = 1.0;
  double r = 0.1;
  double alpha = 0.0;
};

void validate(const StraussParams& p);
void validate(const InhomStraussParams& p);

/// Strauss process: h(x) = beta^n(x) gamma^D(x), D = number of r-close pairs.
/// Envelope phi = beta.
class StraussModel : public Model {
 public:
  StraussModel(const Window& window, const StraussParams& params);

  const StraussParams& params() const noexcept { return params_; }

  double log_h(const PointPattern& x) const override;
  double log_papangelou(const PointPattern& x, std::span<const double> xi) const override;
  using Model::log_papangelou;
  double log_phi(std::span<const double> xi) const override;
  double phi_integral() const override;
  Point sample_phi_proposal(Rng& rng) const override;
  double interaction_range() const override { return params_.r; }
  bool repulsive() const override { return true; }
  std::string describe() const override;

 private:
  StraussParams params_;
  double log_beta_;
  double log_gamma_;
};

/// Strauss process with vertical trend: h(x) = beta^n gamma^D prod exp(-alpha xi_2^2),
/// xi_2 being coordinate index 1. Envelope phi = beta.
class InhomStraussModel : public Model {
 public:
  InhomStraussModel(const Window& window, const InhomStraussParams& params);

  const InhomStraussParams& params() const noexcept { return params_; }

  double log_h(const PointPattern& x) const override;
  double log_papangelou(const PointPattern& x, std::span<const double> xi) const override;
  using Model::log_papangelou;
  double log_phi(std::span<const double> xi) const override;
  double phi_integral() const override;
  Point sample_phi_proposal(Rng& rng) const override;
  double interaction_range() const override { return params_.r; }
  bool repulsive() const override { return true; }
  std::string describe() const override;

 private:
  InhomStraussParams params_;
  double log_beta_;
  double log_gamma_;
};

double strauss_log_h(const StraussParams& p, const PointPattern& x);
double strauss_log_papangelou(const StraussParams& p, const PointPattern& x, const Point& xi);
double inhom_strauss_log_h(const InhomStraussParams& p, const PointPattern& x);
double inhom_strauss_log_papangelou(const InhomStraussParams& p, const PointPattern& x, const Point& xi);

/// The functional K whose expectation under f is estimated.
class Statistic {
 public:
  virtual ~Statistic() = default;
  virtual double evaluate(const PointPattern& x) const = 0;
  virtual std::string describe() const = 0;
};

// K(x) = lambda_f(x, o): the GNZ intensity statistic.
class PapangelouOriginStatistic : public Statistic {
 public:
  explicit PapangelouOriginStatistic(std::shared_ptr<const Model> model);
  double evaluate(const PointPattern& x) const override;
  std::string describe() const override { return "papangelou_origin"; }

 private:
  std::shared_ptr<const Model> model_;
  Point origin_;
};

// K(x) = #{xi in x : |xi_axis| >= band}.
class BoundaryCountStatistic : public Statistic {
 public:
  explicit BoundaryCountStatistic(double band, std::size_t axis = 1);
  double evaluate(const PointPattern& x) const override;
  std::string describe() const override;

 private:
  double band_;
  std::size_t axis_;
};

class PointCountStatistic : public Statistic {
 public:
  double evaluate(const PointPattern& x) const override { return static_cast<double>(x.size()); }
  std::string describe() const override { return "point_count"; }
};

class ConstantStatistic : public Statistic {
 public:
  explicit ConstantStatistic(double value) : value_(value) {}
  double evaluate(const PointPattern&) const override { return value_; }
  std::string describe() const override { return "constant"; }

 private:
  double value_;
};

std::shared_ptr<const Statistic> k_papangelou_origin(std::shared_ptr<const Model> model);
std::shared_ptr<const Statistic> k_boundary_count(double band);
std::shared_ptr<const Statistic> k_point_count();

}  // namespace ptproc

#endif  // PTPROC_MODELS_HPP
