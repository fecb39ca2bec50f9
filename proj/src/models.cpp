#include "ptproc/models.hpp"

#include <cmath>
#include <sstream>

#include "ptproc/error.hpp"

namespace ptproc {

namespace {

void validate_common(double beta, double gamma, double r) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0, 1]");
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("r must be positive and finite");
}

// The D term vanishes for gamma == 1; skip the pair count entirely.
double interaction_log(double log_gamma, const PointPattern& x, double r) {
  if (log_gamma == 0.0) return 0.0;
  return static_cast<double>(close_pair_count(x, r)) * log_gamma;
}

double neighbour_log(double log_gamma, const PointPattern& x, std::span<const double> xi, double r) {
  if (log_gamma == 0.0) return 0.0;
  return static_cast<double>(neighbor_count(x, xi, r)) * log_gamma;
}

}  // namespace

double Model::phi(const Point& xi) const { return std::exp(log_phi(xi.coords())); }

void validate(const StraussParams& p) { validate_common(p.beta, p.gamma, p.r); }

void validate(const InhomStraussParams& p) {
  validate_common(p.beta, p.gamma, p.r);
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) throw InvalidArgument("alpha must be non-negative");
}

double strauss_log_h(const StraussParams& p, const PointPattern& x) {
  const double log_gamma = std::log(p.gamma);
  return static_cast<double>(x.size()) * std::log(p.beta) + interaction_log(log_gamma, x, p.r);
}

double strauss_log_papangelou(const StraussParams& p, const PointPattern& x, const Point& xi) {
  return std::log(p.beta) + neighbour_log(std::log(p.gamma), x, xi.coords(), p.r);
}

double inhom_strauss_log_h(const InhomStraussParams& p, const PointPattern& x) {
  double trend = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = x.coords(i)[1];
    trend += y * y;
  }
  return strauss_log_h({p.beta, p.gamma, p.r}, x) - p.alpha * trend;
}

double inhom_strauss_log_papangelou(const InhomStraussParams& p, const PointPattern& x, const Point& xi) {
  return strauss_log_papangelou({p.beta, p.gamma, p.r}, x, xi) - p.alpha * xi[1] * xi[1];
}

StraussModel::StraussModel(const Window& window, const StraussParams& params)
    : Model(window), params_(params) {
  validate(params);
  log_beta_ = std::log(params.beta);
  log_gamma_ = std::log(params.gamma);
}

double StraussModel::log_h(const PointPattern& x) const {
  return static_cast<double>(x.size()) * log_beta_ + interaction_log(log_gamma_, x, params_.r);
}

double StraussModel::log_papangelou(const PointPattern& x, std::span<const double> xi) const {
  return log_beta_ + neighbour_log(log_gamma_, x, xi, params_.r);
}

double StraussModel::log_phi(std::span<const double>) const { return log_beta_; }

double StraussModel::phi_integral() const { return params_.beta * window().area(); }

Point StraussModel::sample_phi_proposal(Rng& rng) const { return uniform_point(window(), rng); }

std::string StraussModel::describe() const {
  std::ostringstream os;
  os << "strauss(beta=" << params_.beta << ", gamma=" << params_.gamma << ", r=" << params_.r << ")";
  return os.str();
}

InhomStraussModel::InhomStraussModel(const Window& window, const InhomStraussParams& params)
    : Model(window), params_(params) {
  validate(params);
  if (window.dim() < 2) throw InvalidArgument("inhomogeneous Strauss needs dimension >= 2");
  log_beta_ = std::log(params.beta);
  log_gamma_ = std::log(params.gamma);
}

double InhomStraussModel::log_h(const PointPattern& x) const {
  double trend = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = x.coords(i)[1];
    trend += y * y;
  }
  return static_cast<double>(x.size()) * log_beta_ + interaction_log(log_gamma_, x, params_.r) -
         params_.alpha * trend;
}

double InhomStraussModel::log_papangelou(const PointPattern& x, std::span<const double> xi) const {
  return log_beta_ + neighbour_log(log_gamma_, x, xi, params_.r) - params_.alpha * xi[1] * xi[1];
}

double InhomStraussModel::log_phi(std::span<const double>) const { return log_beta_; }

double InhomStraussModel::phi_integral() const { return params_.beta * window().area(); }

Point InhomStraussModel::sample_phi_proposal(Rng& rng) const { return uniform_point(window(), rng); }

std::string InhomStraussModel::describe() const {
  std::ostringstream os;
  os << "inhom_strauss(beta=" << params_.beta << ", gamma=" << params_.gamma << ", r=" << params_.r
     << ", alpha=" << params_.alpha << ")";
  return os.str();
}

PapangelouOriginStatistic::PapangelouOriginStatistic(std::shared_ptr<const Model> model)
    : model_(std::move(model)) {
  if (!model_) throw InvalidArgument("papangelou_origin needs a model");
  origin_ = Point::origin(model_->window().dim());
  if (!model_->window().contains(origin_)) {
    throw InvalidArgument("papangelou_origin: the origin must lie inside the window");
  }
}

double PapangelouOriginStatistic::evaluate(const PointPattern& x) const {
  return std::exp(model_->log_papangelou(x, origin_));
}

BoundaryCountStatistic::BoundaryCountStatistic(double band, std::size_t axis)
    : band_(band), axis_(axis) {
  if (!(band >= 0.0) || !std::isfinite(band)) throw InvalidArgument("band must be non-negative");
}

double BoundaryCountStatistic::evaluate(const PointPattern& x) const {
  if (axis_ >= x.dim()) throw InvalidArgument("boundary_count: axis exceeds pattern dimension");
  std::size_t count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x.coords(i)[axis_]) >= band_) ++count;
  }
  return static_cast<double>(count);
}

std::string BoundaryCountStatistic::describe() const {
  std::ostringstream os;
  os << "boundary_count(band=" << band_ << ")";
  return os.str();
}

std::shared_ptr<const Statistic> k_papangelou_origin(std::shared_ptr<const Model> model) {
  return std::make_shared<PapangelouOriginStatistic>(std::move(model));
}

std::shared_ptr<const Statistic> k_boundary_count(double band) {
  return std::make_shared<BoundaryCountStatistic>(band);
}

std::shared_ptr<const Statistic> k_point_count() { return std::make_shared<PointCountStatistic>(); }

}  // namespace ptproc
