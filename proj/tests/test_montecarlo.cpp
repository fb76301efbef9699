#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "readout/errors.hpp"
#include "readout/montecarlo.hpp"

using namespace readout;
using namespace readout::mc;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

ExperimentPlan max_plan(const QaaParams& p, std::optional<int> gamma = std::nullopt) {
  return ExperimentPlan::max_violation(p.theta(), p.n_c(), gamma);
}

}  // namespace

TEST(Seeds, SubstreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 3; ++s) {
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(substream_seed(s, k));
  }
  EXPECT_EQ(seen.size(), 3000u);
  EXPECT_EQ(substream_seed(7, 3), substream_seed(7, 3));
}

TEST(ExactStats, ReproduceClosedForm) {
  for (int g = 3; g <= 6; ++g) {
    const auto p = QaaParams::from_gamma(g);
    const auto plan = max_plan(p, g);
    const auto r = entropy::evaluate_inequality(exact_readout_stats(p, plan), plan);
    EXPECT_NEAR(r.d_value, static_cast<double>(oracle::d_min(oracle::theta_of_gamma(g))), 1e-9);
    EXPECT_TRUE(r.violated);
    ASSERT_TRUE(r.plan.has_value());
    EXPECT_EQ(*r.plan, plan);
  }
  const auto p = QaaParams::from_gamma(4);
  for (std::int64_t steps : {1, 2, 3, 7}) {
    for (std::int64_t n_d = steps; n_d <= p.n_c(); n_d += steps * 5) {
      const auto plan = ExperimentPlan::make(steps, n_d, p.n_c());
      const double d = entropy::evaluate_inequality(exact_readout_stats(p, plan)).d_value;
      EXPECT_NEAR(d, static_cast<double>(oracle::d_value(p.theta(), steps, n_d)), 1e-9);
    }
  }
}

TEST(ExactStats, MarginalsFollowTheSineLaw) {
  const auto p = QaaParams::from_gamma(3);
  const auto plan = ExperimentPlan::make(5, 25, p.n_c());
  const auto model = readout_model(p, plan);
  ASSERT_EQ(model.marginals.size(), 6u);
  for (std::size_t j = 0; j <= 5; ++j) {
    EXPECT_NEAR(model.marginals[j][0],
                static_cast<double>(oracle::rotation_target_probability(p.theta(), p.p0(), 5 * j)),
                1e-12);
  }
}

TEST(Sampling, QuarterTurnPlanIsExactlyDeterministic) {
  const auto p = QaaParams::from_theta(std::numbers::pi / 8);
  ASSERT_EQ(p.n_c(), 4);
  const auto plan = ExperimentPlan::make(1, 4, p.n_c());
  Rng rng(3);
  for (std::uint64_t shots : {1u, 10u, 10000u}) {
    const auto s = sample_conditionals(p, plan, shots, rng);
    for (std::size_t a = 0; a < 2; ++a) {
      const auto stay = s.conditional(0, 1, a, a);
      if (stay) EXPECT_EQ(*stay, 0.0);
      const auto flip = s.conditional(0, 1, a, 1 - a);
      if (flip) EXPECT_EQ(*flip, 1.0);
    }
  }
}

TEST(Sampling, ConditionalErrorShrinksLikeInverseRootShots) {
  const auto p = QaaParams::from_gamma(3);
  const auto plan = ExperimentPlan::make(5, 25, p.n_c());
  const auto exact = qaa::step_conditional_probs(p, plan.step_power());
  std::vector<double> medians;
  for (std::uint64_t shots : {1'000u, 10'000u, 100'000u}) {
    std::vector<double> errors;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      Rng rng(substream_seed(shots, rep));
      const auto s = sample_conditionals(p, plan, shots, rng);
      double worst = 0;
      for (std::size_t j = 1; j <= 5; ++j) {
        for (std::size_t a = 0; a < 2; ++a) {
          const auto c = s.conditional(j - 1, j, a, 0);
          if (c) worst = std::max(worst, std::abs(*c - exact.at(a, 0)));
        }
      }
      errors.push_back(worst);
    }
    const double med = median(errors);
    // binomial spread for the rarest row entry, with margin
    EXPECT_LT(med, 5.0 * std::sqrt(0.25 / static_cast<double>(shots))) << shots;
    medians.push_back(med);
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(Estimate, MeanDeviationShrinksWithShots) {
  const auto p = QaaParams::from_gamma(3);
  const auto plan = max_plan(p, 3);
  std::vector<double> medians;
  for (std::uint64_t shots : {1'000u, 10'000u, 100'000u}) {
    std::vector<double> dev;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
      const auto r = estimate_d({p, plan, shots, 5, substream_seed(99, rep), 1});
      dev.push_back(std::abs(r.d_mean - r.theory_d));
    }
    medians.push_back(median(dev));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(Estimate, ReproducibleAcrossThreadCounts) {
  const auto p = QaaParams::from_gamma(3);
  const auto plan = max_plan(p, 3);
  const auto a = estimate_d({p, plan, 1000, 64, 123, 1});
  const auto b = estimate_d({p, plan, 1000, 64, 123, 4});
  const auto c = estimate_d({p, plan, 1000, 64, 124, 1});
  EXPECT_EQ(a.per_trial_d, b.per_trial_d);
  EXPECT_EQ(a.d_mean, b.d_mean);
  EXPECT_NE(a.per_trial_d, c.per_trial_d);
  EXPECT_EQ(a.per_trial_d.size(), 64u);
  EXPECT_GE(a.d_std, 0.0);
}

TEST(Estimate, MaxViolationPlanWithinThreeSigma) {
  for (int g : {3, 4}) {
    const auto p = QaaParams::from_gamma(g);
    const auto r = estimate_d({p, max_plan(p, g), kDefaultShots, 200, 2024, 0});
    EXPECT_TRUE(r.within_sigma(3.0)) << g << ": " << r.d_mean << " +/- " << r.d_std;
    EXPECT_NEAR(r.theory_d, static_cast<double>(oracle::d_min(oracle::theta_of_gamma(g))), 1e-12);
    EXPECT_GT(r.d_std, 0.002);
    EXPECT_LT(r.d_std, 0.03);
  }
}

TEST(Estimate, SingleStepPlanIsZero) {
  const auto p = QaaParams::from_gamma(3);
  const auto r = estimate_d({p, ExperimentPlan::make(1, 20, p.n_c()), 1000, 50, 1, 1});
  EXPECT_TRUE(r.within_sigma(3.0) || r.d_std == 0.0);
  EXPECT_EQ(r.d_mean, 0.0);
  EXPECT_EQ(r.theory_d, 0.0);
}

TEST(Estimate, RejectsEmptyRuns) {
  const auto p = QaaParams::from_gamma(3);
  EXPECT_THROW(estimate_d({p, max_plan(p), 0, 10, 1, 1}), ConfigError);
  EXPECT_THROW(estimate_d({p, max_plan(p), 10, 0, 1, 1}), ConfigError);
}

TEST(Snap, PicksValidNearbyPlans) {
  for (double beta = 0; beta <= 1.0; beta += 0.05) {
    for (double alpha = 0; alpha <= beta; alpha += 0.05) {
      const auto plan = snap_to_plan(beta, alpha, 157);
      EXPECT_EQ(plan.n_d() % plan.steps(), 0);
      EXPECT_EQ(plan.n_d(), std::clamp<std::int64_t>(std::llround(std::pow(157.0, beta)), 1, 157));
    }
  }
  EXPECT_EQ(snap_to_plan(1.0, 1.0, 49).steps(), 49);
  EXPECT_THROW(snap_to_plan(0.5, 0.7, 49), PlanError);
}

TEST(Landscape, ExactGridProperties) {
  for (int g = 3; g <= 6; ++g) {
    const auto land = landscape_scan(g, 20, LandscapeMode::kExact);
    for (const auto& c : land.cells) {
      if (c.steps == 1) EXPECT_EQ(c.d, 0.0);
      EXPECT_LE(c.alpha, c.beta + 1e-12);
    }
    const double dmin = static_cast<double>(oracle::d_min(oracle::theta_of_gamma(g)));
    // The grid alone may skip n_d near pi/(4 theta); it still bottoms out on
    // the diagonal close to the quarter-turn value.
    const auto& best = land.minimum();
    EXPECT_EQ(best.steps, best.n_d) << "gamma=" << g;
    EXPECT_NEAR(best.d, dmin, 0.015) << "gamma=" << g;
    // The quarter-turn slice always carries that value exactly.
    double overall = best.d;
    for (const auto& s : land.slices) overall = std::min(overall, s.d);
    EXPECT_LE(overall, dmin + 1e-12) << "gamma=" << g;
  }
}

TEST(Landscape, GlobalMinimumSitsOnTheDiagonalNearTheQuarterTurn) {
  // Exhaustive over every feasible integer plan; the optimum lies slightly
  // below L = n_d = CI(pi/(4 theta)), a little more negative than D_min.
  const std::int64_t expected_argmin[] = {23, 76};
  for (int g = 3; g <= 4; ++g) {
    const auto theta = oracle::theta_of_gamma(g);
    const auto n_c = QaaParams::from_gamma(g).n_c();
    oracle::ld best = 1;
    std::int64_t best_l = 0;
    std::int64_t best_nd = 0;
    for (std::int64_t l = 1; l <= n_c; ++l) {
      for (std::int64_t n_d = l; n_d <= n_c; n_d += l) {
        const auto d = oracle::d_value(theta, l, n_d);
        if (d < best) {
          best = d;
          best_l = l;
          best_nd = n_d;
        }
      }
    }
    EXPECT_EQ(best_l, best_nd);
    EXPECT_EQ(best_l, expected_argmin[g - 3]);
    const double dmin = static_cast<double>(oracle::d_min(theta));
    EXPECT_LE(static_cast<double>(best), dmin);
    EXPECT_NEAR(static_cast<double>(best), dmin, 0.015);
    EXPECT_NEAR(entropy::closed_form_d(static_cast<double>(theta), best_l, best_nd),
                static_cast<double>(best), 1e-12);
  }
}

TEST(Landscape, QuarterTurnSliceHoldsTheTableValue) {
  const auto land = landscape_scan(3, 10, LandscapeMode::kExact);
  bool found = false;
  for (const auto& s : land.slices) {
    if (s.steps == 25 && s.n_d == 25) {
      found = true;
      EXPECT_NEAR(s.d, -0.714, 0.002);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Landscape, LargerStepCountsViolateMore) {
  const auto land = landscape_scan(4, 10, LandscapeMode::kExact);
  auto slice_min = [&](std::int64_t steps) {
    double m = 1e9;
    for (const auto& s : land.slices) {
      if (s.steps == steps) m = std::min(m, s.d);
    }
    return m;
  };
  EXPECT_LT(slice_min(4), slice_min(3));
  EXPECT_LT(slice_min(3), slice_min(2));
  EXPECT_LT(slice_min(79), slice_min(4));
}

TEST(Landscape, SampledGridAgreesCellwise) {
  LandscapeOptions opts{QaaParams::from_gamma(3), 3, 5, LandscapeMode::kSampled, 10'000, 20, 8, 0};
  const auto sampled = landscape_scan(opts);
  opts.mode = LandscapeMode::kExact;
  const auto exact = landscape_scan(opts);
  ASSERT_EQ(sampled.cells.size(), exact.cells.size());
  for (std::size_t i = 0; i < exact.cells.size(); ++i) {
    const auto& s = sampled.cells[i];
    const auto& e = exact.cells[i];
    ASSERT_EQ(s.steps, e.steps);
    ASSERT_EQ(s.n_d, e.n_d);
    EXPECT_LE(std::abs(s.d - e.d), 3.0 * s.d_std + 1e-12) << s.steps << "," << s.n_d;
  }
  const auto again = landscape_scan(LandscapeOptions{QaaParams::from_gamma(3), 3, 5,
                                                     LandscapeMode::kSampled, 10'000, 20, 8, 1});
  for (std::size_t i = 0; i < again.cells.size(); ++i) EXPECT_EQ(again.cells[i].d, sampled.cells[i].d);
}

TEST(Landscape, RejectsZeroResolution) {
  EXPECT_THROW(landscape_scan(3, 0, LandscapeMode::kExact), PlanError);
}
