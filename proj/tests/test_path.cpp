#include <gtest/gtest.h>

#include <cmath>

#include "pssmp/pssmp.hpp"

using namespace pssmp;

TEST(Path, DriftOnlyIsExactLine) {
  Engine rng(1);
  auto p = simulate_path(SubordinatorSpec::drift_only(1.0), 5.0, 0, rng);
  ASSERT_TRUE(p.is_jump_drift());
  EXPECT_TRUE(p.jump_drift_rep().jump_times.empty());
  for (double t : {0.0, 0.3, 2.5, 5.0}) EXPECT_DOUBLE_EQ(p.value_at(t), t);
}

TEST(Path, GridLengthAndMonotone) {
  Engine rng(SeedPlan(2).stream(0));
  auto p = simulate_path(SubordinatorSpec::stable(0.5, 1.0), 1.0, 0.01, rng);
  ASSERT_FALSE(p.is_jump_drift());
  EXPECT_EQ(p.grid_rep().values.size(), 101u);
  EXPECT_EQ(p.grid_rep().values.front(), 0.0);
  EXPECT_TRUE(std::is_sorted(p.grid_rep().values.begin(), p.grid_rep().values.end()));
  double prev = 0;
  for (double t = 0; t <= 1.0; t += 0.0037) {
    EXPECT_GE(p.value_at(t), prev);
    prev = p.value_at(t);
  }
}

TEST(Path, JumpTimesIncreasingWithinHorizon) {
  Engine rng(SeedPlan(3).stream(0));
  auto p = simulate_path(SubordinatorSpec::compound_poisson(3.0, JumpLaw::exponential(1.0), 0.2), 10.0, 0, rng);
  const auto& r = p.jump_drift_rep();
  ASSERT_FALSE(r.jump_times.empty());
  for (std::size_t k = 1; k < r.jump_times.size(); ++k) EXPECT_LT(r.jump_times[k - 1], r.jump_times[k]);
  EXPECT_GE(r.jump_times.front(), 0.0);
  EXPECT_LE(r.jump_times.back(), 10.0);
  for (double s : r.jump_sizes) EXPECT_GT(s, 0.0);
}

TEST(Path, OutsideHorizonIsRangeError) {
  auto p = SubordinatorPath::jump_drift(1.0, {}, {}, 2.0);
  EXPECT_THROW(p.value_at(2.5), RangeError);
  EXPECT_THROW(p.value_at(-0.1), RangeError);
}

TEST(Path, NonPositiveStepIsUsageError) {
  Engine rng(1);
  EXPECT_THROW(simulate_path(SubordinatorSpec::stable(0.5), 1.0, -1.0, rng), UsageError);
  EXPECT_THROW(SubordinatorPath::grid(0.0, {0.0, 1.0}, 1.0), UsageError);
}

TEST(Path, InvalidRepresentationRejected) {
  EXPECT_THROW(SubordinatorPath::jump_drift(0.0, {2.0, 1.0}, {1.0, 1.0}, 3.0), DomainError);
  EXPECT_THROW(SubordinatorPath::grid(0.5, {0.0, 1.0, 0.5}, 1.0), DomainError);
  EXPECT_THROW(SubordinatorPath::grid(0.5, {0.0, 1.0}, 1.0), UsageError);
}

TEST(Path, TerminalValueMatchesIncrementLaw) {
  const std::size_t n = 10000;
  SeedPlan plan(44);
  auto spec = SubordinatorSpec::stable(0.5, 1.0);
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    Engine rng = plan.stream(i);
    a[i] = simulate_path(spec, 1.0, 1e-3, rng).terminal_value();
  }
  // xi_1 for phi = sqrt(lambda) is Levy with P(xi_1 <= x) = erfc(1/(2 sqrt x))
  double ks = ks_distance(EmpiricalDistribution::from_samples(a),
                          [](double x) { return x <= 0 ? 0.0 : std::erfc(0.5 / std::sqrt(x)); });
  EXPECT_LE(ks, 0.01);
}

TEST(Path, CoarsenedKeepsGridValues) {
  auto p = SubordinatorPath::grid(0.25, {0, 0.1, 0.3, 0.35, 1.0}, 1.0);
  auto c = p.coarsened(2);
  EXPECT_EQ(c.grid_rep().values, (std::vector<double>{0, 0.3, 1.0}));
  EXPECT_DOUBLE_EQ(c.horizon(), 1.0);
}

TEST(Passage, ContinuousCrossing) {
  auto p = SubordinatorPath::jump_drift(1.0, {}, {}, 10.0);
  auto r = first_passage(p, 3.0);
  ASSERT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.passage_time, 3.0);
  EXPECT_DOUBLE_EQ(r.age, 0.0);
  EXPECT_DOUBLE_EQ(r.overshoot, 0.0);
}

TEST(Passage, JumpCrossing) {
  auto p = SubordinatorPath::jump_drift(0.0, {2.0}, {5.0}, 10.0);
  auto r = first_passage(p, 3.0);
  ASSERT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.passage_time, 2.0);
  EXPECT_DOUBLE_EQ(r.age, 3.0);
  EXPECT_DOUBLE_EQ(r.overshoot, 2.0);
  EXPECT_DOUBLE_EQ(r.xi_before, 0.0);
  EXPECT_DOUBLE_EQ(r.xi_after, 5.0);
}

TEST(Passage, NotPassedWithinHorizon) {
  auto p = SubordinatorPath::jump_drift(0.1, {}, {}, 1.0);
  auto r = first_passage(p, 3.0);
  EXPECT_FALSE(r.passed);
  EXPECT_TRUE(std::isinf(r.overshoot));
}

TEST(Passage, InvariantsOnRandomPaths) {
  SeedPlan plan(8);
  for (std::size_t i = 0; i < 200; ++i) {
    Engine rng = plan.stream(i);
    auto p = simulate_path(SubordinatorSpec::compound_poisson(1.0, JumpLaw::exponential(1.0), 0.3), 50.0, 0, rng);
    auto r = first_passage(p, 4.0);
    ASSERT_TRUE(r.passed);
    EXPECT_GE(r.age, 0.0);
    EXPECT_LE(r.age, 4.0);
    EXPECT_NEAR(p.left_limit(r.passage_time), 4.0 - r.age, 1e-12);
    EXPECT_NEAR(p.value_at(r.passage_time), 4.0 + r.overshoot, 1e-12);
  }
}

TEST(Passage, StableAgeIsArcsine) {
  const double beta = 0.5, b = 1.0;
  const std::size_t n = 10000;
  SeedPlan plan(19);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    Engine rng = plan.stream(i);
    PathSimulator sim(SubordinatorSpec::stable(beta, 1.0), 1e-3, rng);
    for (double h = 1.0;; h *= 2) {
      sim.extend_to(h);
      auto r = first_passage(sim.path(), b);
      if (r.passed) {
        u[i] = r.age / b;
        break;
      }
    }
  }
  double ks = ks_distance(EmpiricalDistribution::from_samples(u), [&](double x) { return arcsine_cdf(beta, x); });
  EXPECT_LE(ks, 0.02);
}

TEST(Ratio, DriftOnlyRatioIsOne) {
  auto ts = doubling_times(1.0, 20);
  auto r = running_ratio_stats(ts, ts, [](double t) { return t; });
  for (std::size_t k = 0; k < ts.size(); ++k) {
    EXPECT_DOUBLE_EQ(r.running_inf[k], 1.0);
    EXPECT_DOUBLE_EQ(r.running_sup[k], 1.0);
  }
}

TEST(Ratio, StableLowerEnvelopeOrder) {
  // liminf xi_t LL(t) / t^2 = c_{1/2} = 1/4 for Stable(1/2); finite-range running infima sit near it
  auto spec = SubordinatorSpec::stable(0.5, 1.0);
  auto ts = doubling_times(16.0, 37);
  std::vector<double> lows;
  for (std::size_t i = 0; i < 21; ++i) {
    Engine rng(SeedPlan(60).stream(i));
    auto r = running_ratio_stats(ts, sample_at_times(spec, ts, rng),
                                 [](double t) { return t * t / std::log(std::log(t)); });
    EXPECT_DOUBLE_EQ(r.times.back(), std::ldexp(1.0, 40));
    lows.push_back(r.running_inf.back());
  }
  std::nth_element(lows.begin(), lows.begin() + 10, lows.end());
  EXPECT_GE(lows[10], 0.125);
  EXPECT_LE(lows[10], 1.0);
}

TEST(Path, CsvHeaders) {
  auto p = SubordinatorPath::jump_drift(0.5, {1.0}, {2.0}, 3.0);
  EXPECT_EQ(p.to_csv().substr(0, 26), "jump_time,jump_size,drift\n");
  auto g = SubordinatorPath::grid(0.5, {0.0, 1.0, 2.0}, 1.0);
  EXPECT_EQ(g.to_csv().substr(0, 5), "t,xi\n");
}
