#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "ptproc/error.hpp"
#include "ptproc/models.hpp"
#include "ptproc/poisson.hpp"
#include "support/reference.hpp"

using namespace ptproc;

namespace {

const Window kUnit = Window::cube(-0.5, 0.5);

std::vector<reftest::Pt> to_ref(const PointPattern& x) {
  std::vector<reftest::Pt> p;
  for (std::size_t i = 0; i < x.size(); ++i) p.push_back({x.coords(i)[0], x.coords(i)[1]});
  return p;
}

std::vector<std::shared_ptr<const Model>> model_zoo() {
  return {
      std::make_shared<StraussModel>(kUnit, StraussParams{50, 0.4, 0.1}),
      std::make_shared<StraussModel>(kUnit, StraussParams{100, 0.2, 0.1}),
      std::make_shared<StraussModel>(kUnit, StraussParams{30, 1.0, 0.1}),
      std::make_shared<StraussModel>(Window({0, 0}, {2, 0.5}), StraussParams{40, 0.7, 0.15}),
      std::make_shared<InhomStraussModel>(kUnit, InhomStraussParams{50, 0.8, 0.1, 1.0}),
      std::make_shared<InhomStraussModel>(kUnit, InhomStraussParams{100, 0.3, 0.1, 3.5}),
  };
}

}  // namespace

TEST(Strauss, LogHExamples) {
  const StraussParams p{50, 0.4, 0.1};
  EXPECT_NEAR(strauss_log_h(p, PointPattern(kUnit, {{0, 0}, {0.05, 0}})), std::log(1000.0), 1e-12);
  EXPECT_EQ(strauss_log_h(p, PointPattern(kUnit)), 0.0);
  const StraussParams poisson{50, 1.0, 0.1};
  const PointPattern three(kUnit, {{0, 0}, {0.01, 0}, {0.02, 0}});
  EXPECT_EQ(strauss_log_h(poisson, three), 3.0 * std::log(50.0));
}

TEST(Strauss, PapangelouExamples) {
  const StraussParams p{50, 0.4, 0.1};
  EXPECT_NEAR(strauss_log_papangelou(p, PointPattern(kUnit, {{0, 0}}), {0.05, 0}), std::log(20.0), 1e-12);
  EXPECT_NEAR(strauss_log_papangelou(p, PointPattern(kUnit), {0.3, -0.2}), std::log(50.0), 1e-15);
}

TEST(InhomStrauss, Examples) {
  const InhomStraussParams p{50, 0.4, 0.1, 1.0};
  EXPECT_NEAR(inhom_strauss_log_h(p, PointPattern(kUnit, {{0, 0.5}})), std::log(50.0) - 0.25, 1e-12);
  EXPECT_EQ(inhom_strauss_log_h(p, PointPattern(kUnit)), 0.0);
  EXPECT_NEAR(inhom_strauss_log_papangelou(p, PointPattern(kUnit), {0, 0.5}), std::log(50.0) - 0.25, 1e-12);

  Rng rng(4);
  const InhomStraussParams flat{50, 0.4, 0.1, 0.0};
  const StraussParams plain{50, 0.4, 0.1};
  for (int i = 0; i < 100; ++i) {
    const PointPattern x = sample_poisson(kUnit, 40, rng);
    EXPECT_EQ(inhom_strauss_log_h(flat, x), strauss_log_h(plain, x));
  }
}

TEST(InhomStrauss, RequiresSecondAxis) {
  EXPECT_THROW(InhomStraussModel(Window({0.0}, {1.0}), InhomStraussParams{50, 0.5, 0.1, 1.0}), InvalidArgument);
}

TEST(Params, Validation) {
  EXPECT_THROW(validate(StraussParams{0, 0.5, 0.1}), InvalidArgument);
  EXPECT_THROW(validate(StraussParams{50, 0.0, 0.1}), InvalidArgument);
  EXPECT_THROW(validate(StraussParams{50, 1.5, 0.1}), InvalidArgument);
  EXPECT_THROW(validate(StraussParams{50, 0.5, 0.0}), InvalidArgument);
  EXPECT_THROW(validate(InhomStraussParams{50, 0.5, 0.1, -1.0}), InvalidArgument);
  EXPECT_NO_THROW(validate(StraussParams{50, 1.0, 0.1}));
}

TEST(Models, LogHAgreesWithIndependentFormula) {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const PointPattern x = sample_poisson(kUnit, 60, rng);
    const auto p = to_ref(x);
    EXPECT_NEAR(strauss_log_h({50, 0.4, 0.1}, x), reftest::ref_strauss_log_h(p, 50, 0.4, 0.1), 1e-9);
    EXPECT_NEAR(inhom_strauss_log_h({50, 0.4, 0.1, 2.0}, x), reftest::ref_strauss_log_h(p, 50, 0.4, 0.1, 2.0),
                1e-9);
  }
}

TEST(Models, PapangelouIsLogHDifference) {
  Rng rng(99);
  int cases = 0;
  for (const auto& m : model_zoo()) {
    for (int i = 0; i < 400; ++i) {
      const PointPattern x = sample_poisson(m->window(), rng.uniform(1, 150), rng);
      const Point xi = uniform_point(m->window(), rng);
      const double lh = m->log_h(x);
      const double diff = m->log_h(x.with(xi)) - lh;
      ASSERT_LE(std::abs(m->log_papangelou(x, xi) - diff), 1e-10 * (1.0 + std::abs(lh))) << m->describe();
      ++cases;
    }
  }
  EXPECT_GE(cases, 1000);
}

TEST(Models, LocalStabilityAndEmptyPattern) {
  Rng rng(7);
  for (const auto& m : model_zoo()) {
    EXPECT_EQ(m->log_h(PointPattern(m->window())), 0.0);
    for (int i = 0; i < 300; ++i) {
      const PointPattern x = sample_poisson(m->window(), rng.uniform(1, 150), rng);
      const Point xi = uniform_point(m->window(), rng);
      EXPECT_LE(m->log_papangelou(x, xi), m->log_phi(xi.coords()));
    }
  }
}

TEST(Models, HereditaryOnRandomSubsets) {
  Rng rng(15);
  for (const auto& m : model_zoo()) {
    for (int i = 0; i < 100; ++i) {
      PointPattern x = sample_poisson(m->window(), 80, rng);
      ASSERT_TRUE(std::isfinite(m->log_h(x)));
      while (!x.empty()) {
        x.erase_swap(rng.index(x.size()));
        ASSERT_TRUE(std::isfinite(m->log_h(x)));
      }
    }
  }
}

TEST(Models, PoissonReductionExact) {
  const StraussModel m(kUnit, {50, 1.0, 0.1});
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const PointPattern x = sample_poisson(kUnit, 100, rng);
    EXPECT_EQ(m.log_h(x), static_cast<double>(x.size()) * std::log(50.0));
  }
}

TEST(Models, EnvelopeIsBeta) {
  const InhomStraussModel m(kUnit, {50, 0.5, 0.1, 1.0});
  EXPECT_DOUBLE_EQ(m.phi({0.1, 0.2}), 50.0);
  EXPECT_DOUBLE_EQ(m.phi_integral(), 50.0);
  const StraussModel s(Window::cube(0, 0.2), {50, 0.5, 0.1});
  EXPECT_NEAR(s.phi_integral(), 2.0, 1e-12);
}

TEST(Statistics, PapangelouOrigin) {
  auto m = std::make_shared<StraussModel>(kUnit, StraussParams{50, 0.4, 0.1});
  auto k = k_papangelou_origin(m);
  EXPECT_NEAR(k->evaluate(PointPattern(kUnit)), 50.0, 1e-12);
  EXPECT_NEAR(k->evaluate(PointPattern(kUnit, {{0.05, 0.0}, {0.3, 0.3}})), 20.0, 1e-12);
  auto off = std::make_shared<StraussModel>(Window::cube(0.1, 0.2), StraussParams{50, 0.4, 0.1});
  EXPECT_THROW(k_papangelou_origin(off), InvalidArgument);
}

TEST(Statistics, BoundaryCount) {
  auto k = k_boundary_count(0.49);
  EXPECT_EQ(k->evaluate(PointPattern(kUnit, {{0, 0.495}, {0, 0}})), 1.0);
  EXPECT_EQ(k->evaluate(PointPattern(kUnit, {{0, -0.495}, {0.49, 0.0}})), 1.0);
  EXPECT_EQ(k->evaluate(PointPattern(kUnit)), 0.0);
  EXPECT_THROW(k_boundary_count(-0.1), InvalidArgument);
}

TEST(Statistics, PointCount) {
  auto k = k_point_count();
  EXPECT_EQ(k->evaluate(PointPattern(kUnit, {{0, 0}, {0.1, 0}})), 2.0);
}
