#include <gtest/gtest.h>

#include "robustseg/segmentation.hpp"
#include "support/generators.hpp"

using namespace robustseg;
using R = Rational;

namespace {

ValuationGrid<R> uniform3() { return ValuationGrid<R>({R(1), R(2), R(3)}, {R(1, 3), R(1, 3), R(1, 3)}); }

std::vector<std::size_t> random_support(testgen::Gen& g, const ValuationGrid<R>& grid, const R& s_d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.value(i) > s_d && g.integer(0, 2) > 0) out.push_back(i);
  return out;
}

}  // namespace

TEST(EqualRevenueSegment, Examples) {
  const auto g = uniform3();
  const auto all = equal_revenue_segment(g, {0, 1, 2}, R(0));
  EXPECT_EQ(all.posterior.probs(), (std::vector<R>{R(1, 2), R(1, 6), R(1, 3)}));
  EXPECT_EQ(all.revenue, R(1));

  const auto top = equal_revenue_segment(g, {1, 2}, R(0));
  EXPECT_EQ(top.posterior.probs(), (std::vector<R>{R(0), R(1, 3), R(2, 3)}));
  EXPECT_EQ(top.revenue, R(2));

  const auto single = equal_revenue_segment(g, {1}, R(1, 2));
  EXPECT_EQ(single.posterior.probs(), (std::vector<R>{R(0), R(1), R(0)}));
  EXPECT_EQ(single.revenue, R(3, 2));

  EXPECT_THROW(equal_revenue_segment(g, {0, 1}, R(1)), ValidationError);
  EXPECT_THROW(equal_revenue_segment(g, {}, R(0)), ValidationError);
  EXPECT_THROW(equal_revenue_segment(g, {5}, R(0)), ValidationError);
}

TEST(EqualRevenueSegment, TailRevenuesEqualExactly) {
  testgen::Gen gen(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = gen.exact_grid(static_cast<std::size_t>(gen.integer(2, 6)));
    const R s_d(gen.integer(0, 8), 3);
    const auto support = random_support(gen, g, s_d);
    if (support.empty()) continue;
    const auto seg = equal_revenue_segment(g, support, s_d);
    for (auto i : support) {
      EXPECT_GT(seg.posterior[i], R(0));
      EXPECT_EQ(price_revenue(g, std::span<const R>(seg.posterior.probs()), i, s_d), seg.revenue);
    }
  }
}

TEST(EqualRevenueSegment, PriceSwitchesAtSellerValue) {
  testgen::Gen gen(22);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen.exact_grid(static_cast<std::size_t>(gen.integer(2, 6)));
    const R s_d(gen.integer(0, 12), 4);
    const auto support = random_support(gen, g, s_d);
    if (support.empty()) continue;
    const auto seg = equal_revenue_segment(g, support, s_d);
    // Past the top support value every supported price loses money.
    const R top = g.value(support.back());
    for (int k = 0; k < 64; ++k) {
      const R s = top * R(k, 64);
      const auto price = optimal_price(g, seg.posterior, s);
      if (s <= s_d)
        EXPECT_EQ(price, support.front());
      else
        EXPECT_EQ(price, support.back());
    }
  }
}

TEST(Greedy, CanonicalExample) {
  const auto g = uniform3();
  const auto sigma = greedy_optimal_segmentation(g, R(0));
  ASSERT_EQ(sigma.size(), 3u);
  EXPECT_EQ(sigma.segments()[0].weight, R(2, 3));
  EXPECT_EQ(sigma.segments()[1].weight, R(1, 6));
  EXPECT_EQ(sigma.segments()[2].weight, R(1, 6));
  EXPECT_EQ(sigma.segments()[0].posterior.probs(), (std::vector<R>{R(1, 2), R(1, 6), R(1, 3)}));
  EXPECT_EQ(sigma.segments()[1].posterior.probs(), (std::vector<R>{R(0), R(1, 3), R(2, 3)}));
  EXPECT_EQ(sigma.segments()[2].posterior.probs(), (std::vector<R>{R(0), R(1), R(0)}));
  EXPECT_EQ(segmentation_surplus(g, sigma, R(0)), R(2, 3));
  EXPECT_EQ(segmentation_revenue(g, sigma, R(0)), R(4, 3));
  EXPECT_TRUE(verify_optimal(g, sigma, R(0)).all_pass());
}

TEST(Greedy, SellerValueAboveAllValues) {
  const auto g = uniform3();
  for (const R& s_d : {R(3), R(7, 2)}) {
    const auto sigma = greedy_optimal_segmentation(g, s_d);
    for (const auto& seg : sigma) {
      int nonzero = 0;
      for (const auto& p : seg.posterior.probs()) nonzero += p > R(0);
      EXPECT_EQ(nonzero, 1);
    }
    EXPECT_EQ(segmentation_surplus(g, sigma, s_d), R(0));
  }
}

TEST(Greedy, MinimalStyleKeepsPriorWhenNoSegmentationNeeded) {
  const ValuationGrid<R> g({R(1), R(2), R(3)}, {R(8, 10), R(1, 10), R(1, 10)});
  const auto sigma = greedy_optimal_segmentation(g, R(1, 2), SegmentationStyle::minimal);
  ASSERT_EQ(sigma.size(), 1u);
  EXPECT_EQ(sigma.segments()[0].posterior.probs(), g.prior());
  const auto er = greedy_optimal_segmentation(g, R(1, 2), SegmentationStyle::equal_revenue);
  EXPECT_GT(er.size(), 1u);
  EXPECT_EQ(segmentation_surplus(g, er, R(1, 2)), optimal_surplus(g, R(1, 2)));
}

TEST(Greedy, RejectsNegativeSellerValue) {
  EXPECT_THROW(greedy_optimal_segmentation(uniform3(), R(-1)), ValidationError);
}

TEST(Greedy, ExactAccountingOnRandomGrids) {
  testgen::Gen gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen.exact_grid(static_cast<std::size_t>(gen.integer(2, 6)));
    const R s_d(gen.integer(0, 20), 3);
    for (auto style : {SegmentationStyle::minimal, SegmentationStyle::equal_revenue}) {
      const auto sigma = greedy_optimal_segmentation(g, s_d, style);
      EXPECT_LE(sigma.size(), 2 * g.size());
      EXPECT_EQ(segmentation_surplus(g, sigma, s_d), optimal_surplus(g, s_d));
      EXPECT_EQ(segmentation_revenue(g, sigma, s_d), monopoly_revenue(g, s_d));
      std::vector<R> mean(g.size(), R(0));
      for (const auto& seg : sigma)
        for (std::size_t i = 0; i < g.size(); ++i) mean[i] += seg.weight * seg.posterior[i];
      EXPECT_EQ(mean, g.prior());
    }
  }
}

TEST(Greedy, EqualRevenueImplementationIsStepInSellerValue) {
  testgen::Gen gen(24);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = gen.exact_grid(static_cast<std::size_t>(gen.integer(2, 5)));
    const R s_d(gen.integer(0, 15), 3);
    const auto sigma = greedy_optimal_segmentation(g, s_d, SegmentationStyle::equal_revenue);
    const R target = optimal_surplus(g, s_d);
    for (int k = 0; k <= 40; ++k) {
      const R s = (g.values().back() + R(1)) * R(k, 40);
      EXPECT_EQ(segmentation_surplus(g, sigma, s), s <= s_d ? target : R(0)) << "s=" << s << " s_D=" << s_d;
    }
  }
}

TEST(Greedy, FloatingPointMatchesWithinTolerance) {
  testgen::Gen gen(25);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen.grid(static_cast<std::size_t>(gen.integer(2, 6)));
    const double s_d = gen.uniform(0.0, g.values().back() * 1.1);
    const auto sigma = greedy_optimal_segmentation(g, s_d, SegmentationStyle::equal_revenue);
    const auto rep = verify_optimal(g, sigma, s_d);
    EXPECT_TRUE(rep.all_pass()) << rep.plausibility_residual << ' ' << rep.surplus_residual << ' '
                                << rep.revenue_residual << ' ' << rep.equal_revenue_residual;
  }
}

TEST(Verify, DetectsFailures) {
  const auto g = uniform3();
  const Segmentation<R> prior_only(g, {{R(1), Posterior<R>(g.prior())}});
  const auto rep = verify_optimal(g, prior_only, R(0));
  EXPECT_TRUE(rep.plausible);
  EXPECT_FALSE(rep.surplus_optimal);
  EXPECT_NEAR(rep.surplus_residual, 1.0 / 3.0, 1e-15);

  std::vector<Segment<R>> bad = greedy_optimal_segmentation(g, R(0)).segments();
  bad[0].weight = R(1, 2);
  const auto rep2 = verify_optimal(g, bad, R(0));
  EXPECT_FALSE(rep2.plausible);
  EXPECT_FALSE(rep2.optimal());
}
