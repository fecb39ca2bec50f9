#include <gtest/gtest.h>

#include <cmath>

#include "ptproc/cftp.hpp"
#include "ptproc/error.hpp"
#include "support/golden.hpp"
#include "support/reference.hpp"

using namespace ptproc;

namespace {

const Window kUnit = Window::cube(-0.5, 0.5);
const Window kTiny = Window::cube(golden::kTinyLo, golden::kTinyHi);

class NonRepulsiveStrauss : public StraussModel {
 public:
  using StraussModel::StraussModel;
  bool repulsive() const override { return false; }
};

}  // namespace

TEST(CftpConfig, Validation) {
  EXPECT_THROW(validate(CftpConfig{0, 1.0, false}), InvalidArgument);
  EXPECT_THROW(validate(CftpConfig{61, 1.0, false}), InvalidArgument);
  EXPECT_THROW(validate(CftpConfig{20, 0.0, false}), InvalidArgument);
}

TEST(Cftp, RejectsNonRepulsiveModel) {
  NonRepulsiveStrauss m(kUnit, {50, 0.5, 0.1});
  Rng rng(1);
  EXPECT_THROW(cftp_sample(m, rng), InvalidArgument);
}

TEST(Cftp, HorizonExhaustionIsReported) {
  const StraussModel m(kUnit, {200, 0.2, 0.1});
  Rng rng(2);
  try {
    cftp_sample(m, rng, CftpConfig{1, 1.0, false});
    FAIL() << "expected HorizonExceeded";
  } catch (const HorizonExceeded& e) {
    EXPECT_DOUBLE_EQ(e.horizon(), 2.0);
  }
}

TEST(DominatingTrajectory, EventsStrictlyDecreasingAndDeathsRefersToLivePoints) {
  const StraussModel m(kUnit, {50, 0.5, 0.1});
  Rng rng(3);
  DominatingTrajectory d = DominatingTrajectory::start(m, 1.0, rng);
  d.extend_backward(m, rng);
  d.extend_backward(m, rng);
  EXPECT_DOUBLE_EQ(d.horizon(), 4.0);
  const auto& ev = d.events();
  ASSERT_FALSE(ev.empty());
  std::vector<bool> alive(d.point_count(), false);
  for (std::uint32_t id : d.initial_state()) alive[id] = true;
  double prev = -d.horizon();
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) {
    EXPECT_GT(it->time, prev);
    EXPECT_LE(it->time, 0.0);
    prev = it->time;
    if (it->birth) {
      EXPECT_FALSE(alive[it->id]);
      alive[it->id] = true;
    } else {
      EXPECT_TRUE(alive[it->id]);
      alive[it->id] = false;
    }
  }
  std::size_t at_zero = 0;
  for (bool a : alive) at_zero += a;
  EXPECT_EQ(at_zero, d.final_state().size());
}

TEST(DominatingTrajectory, RestrictionUnchangedByExtension) {
  const StraussModel m(kUnit, {50, 0.6, 0.1});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    DominatingTrajectory d = DominatingTrajectory::start(m, 1.0, rng);
    const std::string before = d.serialize(1.0);
    d.extend_backward(m, rng);
    ASSERT_EQ(d.serialize(1.0), before);
    const std::string mid = d.serialize(2.0);
    d.extend_backward(m, rng);
    ASSERT_EQ(d.serialize(2.0), mid);
  }
}

TEST(DominatingTrajectory, EquilibriumCountsArePoisson) {
  const StraussModel m(kUnit, {50, 0.5, 0.1});
  const int reps = 10000;
  double s0 = 0, s0sq = 0, sT = 0;
  for (int i = 0; i < reps; ++i) {
    Rng rng(derive_seed(9, 0, i));
    const DominatingTrajectory d = DominatingTrajectory::start(m, 2.0, rng);
    const auto n0 = static_cast<double>(d.final_state().size());
    s0 += n0;
    s0sq += n0 * n0;
    sT += static_cast<double>(d.initial_state().size());
  }
  const double se = std::sqrt(50.0 / reps);
  EXPECT_NEAR(s0 / reps, 50.0, 3.0 * se);
  EXPECT_NEAR(sT / reps, 50.0, 3.0 * se);
  EXPECT_NEAR(s0sq / reps - (s0 / reps) * (s0 / reps), 50.0, 3.0 * std::sqrt((50.0 + 2 * 2500.0) / reps));
}

TEST(Sandwich, PoissonCoalescenceFractionAtHorizonEight) {
  // With gamma = 1 both bounds accept every birth, so they meet at time 0 iff
  // every point alive at -T has died: P = exp(-beta |S| e^{-T}).
  const StraussModel m(kUnit, {50, 1.0, 0.1});
  const int reps = 10000;
  int coalesced = 0;
  for (int i = 0; i < reps; ++i) {
    Rng rng(derive_seed(10, 0, i));
    const DominatingTrajectory d = DominatingTrajectory::start(m, 8.0, rng);
    coalesced += run_sandwich(d, m, false).coalesced;
  }
  const double p = std::exp(-50.0 * std::exp(-8.0));
  EXPECT_NEAR(static_cast<double>(coalesced) / reps, p, 4.0 * std::sqrt(p * (1 - p) / reps));
}

TEST(Sandwich, InvariantsHoldOnEveryEvent) {
  const std::shared_ptr<const Model> models[] = {
      std::make_shared<StraussModel>(kUnit, StraussParams{50, 0.2, 0.1}),
      std::make_shared<StraussModel>(kUnit, StraussParams{100, 0.6, 0.1}),
      std::make_shared<InhomStraussModel>(kUnit, InhomStraussParams{50, 0.4, 0.1, 1.0}),
  };
  int runs = 0;
  for (const auto& m : models) {
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      Rng rng(seed);
      DominatingTrajectory d = DominatingTrajectory::start(*m, 1.0, rng);
      for (int k = 0; k < 4; ++k) {
        ASSERT_NO_THROW(run_sandwich(d, *m, true));
        d.extend_backward(*m, rng);
      }
      ++runs;
    }
  }
  EXPECT_GE(runs, 1000);
}

TEST(Sandwich, Funnelling) {
  const StraussModel m(kUnit, {50, 0.5, 0.1});
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    DominatingTrajectory d = DominatingTrajectory::start(m, 1.0, rng);
    SandwichOutcome first = run_sandwich(d, m, false);
    while (!first.coalesced) {
      d.extend_backward(m, rng);
      first = run_sandwich(d, m, false);
    }
    d.extend_backward(m, rng);
    const SandwichOutcome second = run_sandwich(d, m, true);
    ASSERT_TRUE(second.coalesced);
    ASSERT_EQ(second.lower, first.lower);
    ++checked;
  }
  EXPECT_EQ(checked, 300);
}

TEST(CftpSample, PoissonCaseEquidispersion) {
  const StraussModel m(kUnit, {50, 1.0, 0.1});
  const int reps = 1000;
  double s = 0, s2 = 0;
  for (int i = 0; i < reps; ++i) {
    Rng rng(derive_seed(12, 0, i));
    const auto n = static_cast<double>(cftp_sample(m, rng).pattern.size());
    s += n;
    s2 += n * n;
  }
  const double mean = s / reps;
  const double var = (s2 - reps * mean * mean) / (reps - 1);
  EXPECT_NEAR(mean, 50.0, 3.0 * std::sqrt(var / reps));
  EXPECT_NEAR(var, 50.0, 3.0 * std::sqrt((50.0 + 2.0 * 2500.0) / reps));
}

TEST(CftpSample, TinyWindowLawMatchesOracle) {
  const StraussModel m(kTiny, {golden::kTinyBeta, golden::kTinyGamma, golden::kTinyR});
  const int reps = 10000;
  std::vector<double> hist(16, 0.0);
  double s = 0, s2 = 0;
  for (int i = 0; i < reps; ++i) {
    Rng rng(derive_seed(13, 0, i));
    const auto n = cftp_sample(m, rng).pattern.size();
    hist[n] += 1.0;
    s += static_cast<double>(n);
    s2 += static_cast<double>(n * n);
  }
  const std::vector<double> law(golden::kTinyCountLaw.begin(), golden::kTinyCountLaw.end());
  EXPECT_GT(reftest::chi_square_p(hist, law, reps), 0.001);
  const double mean = s / reps;
  const double sd = std::sqrt((s2 - reps * mean * mean) / (reps - 1));
  EXPECT_NEAR(mean, golden::kTinyMeanCount, 3.0 * sd / std::sqrt(reps) + golden::kTinyMeanCountMcSe);
}

TEST(CftpSample, DeterministicPerSeed) {
  const StraussModel m(kUnit, {50, 0.4, 0.1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_EQ(cftp_sample(m, a).pattern, cftp_sample(m, b).pattern);
  }
}
