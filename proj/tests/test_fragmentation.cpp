#include <gtest/gtest.h>

#include <cmath>

#include "pssmp/pssmp.hpp"

using namespace pssmp;

TEST(Split, PhiClosedForms) {
  for (double q : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(phi_fragmentation(BinarySplitLaw::half(), q).value, 1.0 - std::pow(2.0, -q), 1e-15);
    EXPECT_DOUBLE_EQ(phi_fragmentation(BinarySplitLaw::uniform(), q).value, q / (q + 2.0));
    // -log U ~ Exp(1) is the uniform law again
    EXPECT_NEAR(phi_fragmentation(BinarySplitLaw::log_tail(JumpLaw::exponential(1.0)), q).value, q / (q + 2.0), 1e-10);
  }
  EXPECT_THROW(phi_fragmentation(BinarySplitLaw::half(), 0.0), DomainError);
}

TEST(Split, PhiCustomMonteCarlo) {
  BinarySplitLaw custom(CustomSplit{[](Engine& r) { return uniform_open(r); }});
  auto e = phi_fragmentation(custom, 1.0, 200000, 3);
  EXPECT_LE(std::abs(e.value - 1.0 / 3.0), 4 * e.stderr_);
}

TEST(Split, LevyTailClosedForms) {
  auto half = BinarySplitLaw::half();
  EXPECT_DOUBLE_EQ(levy_tail_from_nu(half, 0.5).value, 1.0);
  EXPECT_DOUBLE_EQ(levy_tail_from_nu(half, 0.7).value, 0.0);
  for (double x : {0.1, 1.0, 4.0}) {
    EXPECT_NEAR(levy_tail_from_nu(BinarySplitLaw::uniform(), x).value, std::exp(-2 * x), 1e-15);
    EXPECT_NEAR(levy_tail_from_nu(BinarySplitLaw::log_tail(JumpLaw::exponential(1.0)), x).value, std::exp(-2 * x),
                1e-9);
  }
}

TEST(Split, InvalidDeterministic) { EXPECT_THROW(BinarySplitLaw(DeterministicSplit{1.0}), DomainError); }

TEST(Tagged, FirstSplitTimeHasUnitMean) {
  SeedPlan plan(4);
  std::vector<double> t1(100000);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    Engine rng = plan.stream(i);
    auto tr = tagged_fragment(1.0, BinarySplitLaw::half(), 1e9, rng, TagMode::LeftMost);
    t1[i] = tr.times.at(1);
  }
  auto m = moment_estimate(t1, 1);
  EXPECT_LE(std::abs(m.mean - 1.0), 4 * m.stderr_);
}

TEST(Tagged, LeftMostJumpsAreMinusLogU) {
  Engine rng(SeedPlan(5).stream(0));
  auto tr = tagged_fragment(0.5, BinarySplitLaw::half(), 1e6, rng, TagMode::LeftMost);
  for (double j : tr.jump_sizes()) EXPECT_NEAR(j, std::log(2.0), 1e-12);
  std::vector<double> jumps;
  for (std::size_t i = 0; jumps.size() < 20000; ++i) {
    Engine r = SeedPlan(6).stream(i);
    auto t = tagged_fragment(1.0, BinarySplitLaw::uniform(), 100.0, r, TagMode::LeftMost);
    auto j = t.jump_sizes();
    jumps.insert(jumps.end(), j.begin(), j.end());
  }
  EXPECT_LE(ks_distance(EmpiricalDistribution::from_samples(jumps), [](double x) { return -std::expm1(-x); }),
            ks_critical_value(jumps.size()));
}

TEST(Tagged, SizeBiasedJumpsFollowLevyTail) {
  std::vector<double> jumps;
  for (std::size_t i = 0; jumps.size() < 20000; ++i) {
    Engine r = SeedPlan(7).stream(i);
    auto t = tagged_fragment(1.0, BinarySplitLaw::uniform(), 100.0, r, TagMode::SizeBiased);
    auto j = t.jump_sizes();
    jumps.insert(jumps.end(), j.begin(), j.end());
  }
  auto cdf = [](double x) { return 1.0 - levy_tail_from_nu(BinarySplitLaw::uniform(), std::max(x, 1e-300)).value; };
  EXPECT_LE(ks_distance(EmpiricalDistribution::from_samples(jumps), cdf), ks_critical_value(jumps.size()));
}

TEST(Tagged, PiecewiseConstantLookup) {
  TaggedTrace tr{{0.0, 1.0, 2.5}, {0.0, 0.7, 1.4}};
  EXPECT_DOUBLE_EQ(tr.neg_log_size_at(0.5), 0.0);
  EXPECT_DOUBLE_EQ(tr.neg_log_size_at(1.0), 0.7);
  EXPECT_DOUBLE_EQ(tr.neg_log_size_at(9.0), 1.4);
}

TEST(Population, MassConservedWithoutFloor) {
  Engine rng(SeedPlan(8).stream(0));
  FragmentationConfig cfg;
  cfg.t_max = 20.0;
  cfg.snapshot_times = {1.0, 5.0, 10.0};
  cfg.size_floor = 0;
  auto run = simulate_fragmentation(cfg, BinarySplitLaw::uniform(), rng);
  ASSERT_EQ(run.snapshots.size(), 4u);
  for (const auto& s : run.snapshots) {
    EXPECT_NEAR(s.total_mass, 1.0, 1e-12) << s.time;
    EXPECT_EQ(s.frozen, 0u);
  }
  EXPECT_GT(run.events, 0u);
  EXPECT_EQ(snapshots_csv(run.snapshots).substr(0, 7), "t,size\n");
}

TEST(Population, CapThrowsWithAchievedTime) {
  Engine rng(SeedPlan(9).stream(0));
  FragmentationConfig cfg;
  cfg.t_max = 1e9;
  cfg.particle_cap = 100;
  try {
    simulate_fragmentation(cfg, BinarySplitLaw::half(), rng);
    FAIL();
  } catch (const FragmentationTruncated& e) {
    EXPECT_GT(e.achieved_time, 0.0);
    ASSERT_FALSE(e.snapshots.empty());
    EXPECT_EQ(e.snapshots.back().log_sizes.size(), 100u);
  }
}

TEST(Population, SnapshotOutsideRangeIsUsageError) {
  Engine rng(1);
  FragmentationConfig cfg;
  cfg.snapshot_times = {2.0};
  EXPECT_THROW(simulate_fragmentation(cfg, BinarySplitLaw::half(), rng), UsageError);
}

TEST(Rho, SingleParticleAndWeights) {
  Snapshot one{3.0, {0.0}, 1.0, 0};
  auto r = empirical_rho(one, 3.0);
  EXPECT_EQ(r.first, std::vector<double>{0.0});
  EXPECT_EQ(r.second, std::vector<double>{1.0});
  EXPECT_THROW(empirical_rho(one, 1.0), DomainError);

  Engine rng(SeedPlan(10).stream(0));
  FragmentationConfig cfg;
  cfg.t_max = 50.0;
  cfg.size_floor = 0;
  auto run = simulate_fragmentation(cfg, BinarySplitLaw::half(), rng);
  auto rho = empirical_rho(run.snapshots.back(), 50.0);
  EXPECT_NEAR(neumaier_sum(rho.second), 1.0, 1e-12);
  for (double a : rho.first) EXPECT_LE(a, 0.0);
  EXPECT_EQ(rho_csv(rho).substr(0, 12), "atom,weight\n");
}
