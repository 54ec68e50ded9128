#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace aks;
using aks::testing::series_of;

namespace {

using Idx = std::vector<Index>;

SelectionParams params(std::size_t m, int level, double s_thr) { return SelectionParams{m, level, s_thr, 1.0}; }

void expect_well_formed(const KeyframeSelection& sel, std::size_t horizon, std::size_t m) {
  ASSERT_EQ(sel.indices.size(), std::min(m, horizon));
  EXPECT_EQ(sel.horizon, horizon);
  EXPECT_NO_THROW(sel.validate());
}

}  // namespace

// ---------------------------------------------------------------------------
// UNI

TEST(SelectUni, Examples) {
  EXPECT_EQ(select_uni(8, 4).indices, (Idx{1, 3, 5, 7}));
  EXPECT_EQ(select_uni(5, 5).indices, (Idx{0, 1, 2, 3, 4}));
  aks::testing::CaptureWarnings warnings;
  EXPECT_EQ(select_uni(3, 5).indices, (Idx{0, 1, 2}));
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(SelectUni, FormulaHoldsAndIsDistinct) {
  for (std::size_t t = 1; t <= 60; ++t)
    for (std::size_t m = 1; m <= t; ++m) {
      const auto idx = uniform_indices(t, m);
      ASSERT_EQ(idx.size(), m);
      for (std::size_t i = 0; i < m; ++i)
        EXPECT_EQ(idx[i], static_cast<Index>(std::floor((static_cast<double>(i) + 0.5) * static_cast<double>(t) /
                                                        static_cast<double>(m))));
    }
}

// ---------------------------------------------------------------------------
// TOP

TEST(SelectTop, Examples) {
  EXPECT_EQ(select_top(series_of({0.1, 0.9, 0.5, 0.7}), 2).indices, (Idx{1, 3}));
  EXPECT_EQ(select_top(series_of({0.5, 0.5, 0.5}), 2).indices, (Idx{0, 1}));
  for (std::size_t t : {4u, 9u, 31u}) {
    const auto sel = select_top(series_of(std::vector<double>(t, 0.3)), 3);
    EXPECT_EQ(sel.indices, (Idx{0, 1, 2}));
  }
}

TEST(SelectTop, InvariantUnderIncreasingTransform) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t t = 1 + rng.integer(0, 100);
    const std::size_t m = 1 + rng.integer(0, 20);
    auto s = trial % 2 ? aks::testing::tied_scores(rng, t) : aks::testing::random_scores(rng, t);
    std::vector<double> g(s.size());
    std::transform(s.begin(), s.end(), g.begin(), [](double v) { return std::exp(3.0 * v) - 7.0; });
    aks::testing::QuietWarnings quiet;
    EXPECT_EQ(select_top(series_of(s), m).indices, select_top(series_of(g), m).indices);
  }
}

// ---------------------------------------------------------------------------
// BIN

TEST(SelectBin, Examples) {
  EXPECT_EQ(select_bin(series_of({0, 3, 1, 2, 5, 0, 0, 4}), 2, 1).indices, (Idx{1, 4}));
  EXPECT_EQ(select_bin(series_of(std::vector<double>(8, 1.0)), 4, 2).indices, (Idx{0, 2, 4, 6}));
  EXPECT_EQ(select_bin(series_of({9, 8, 0, 0, 0, 0, 0, 0}), 2, 1).indices, (Idx{0, 4}));
}

TEST(SelectBin, MoreBinsThanBudgetKeepsBestChampions) {
  // level-2 champions: 1 (0.9), 2 (0.7), 5 (0.2), 7 (0.8)
  const auto s = series_of({0.1, 0.9, 0.7, 0.3, 0.1, 0.2, 0.0, 0.8});
  EXPECT_EQ(select_bin(s, 2, 2).indices, (Idx{1, 7}));
  EXPECT_EQ(select_bin(s, 3, 2).indices, (Idx{1, 2, 7}));
}

TEST(SelectBin, FewerBinsThanBudgetSplitsQuotas) {
  // bins [0,4) and [4,8); M=5 -> quotas 3, 2
  const auto s = series_of({0.1, 0.9, 0.7, 0.3, 0.1, 0.2, 0.0, 0.8});
  EXPECT_EQ(select_bin(s, 5, 1).indices, (Idx{1, 2, 3, 5, 7}));
}

TEST(SelectBin, QuotaOverflowMovesToBinsWithRoom) {
  // T=7, L=2: bins [0,1) [1,3) [3,5) [5,7); M=6 -> nominal 2,2,1,1, the
  // 1-frame bin overflows by one and the spare goes to the leftmost bin with room
  const auto s = series_of({0.5, 0.4, 0.3, 0.9, 0.1, 0.6, 0.2});
  const auto sel = select_bin(s, 6, 2);
  EXPECT_EQ(sel.indices, (Idx{0, 1, 2, 3, 4, 5}));
}

TEST(SelectBin, BalancedAndBestWhenBudgetIsTwoToTheL) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int l = static_cast<int>(rng.integer(1, 4));
    const std::size_t m = std::size_t{1} << l;
    const std::size_t t = m * (1 + rng.integer(0, 8));
    const auto scores = aks::testing::random_scores(rng, t);
    const auto sel = select_bin(series_of(scores), m, l);
    EXPECT_EQ(coverage(sel.indices, t, l), 0.0);
    const auto bins = level_ranges(t, l);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const auto best = std::max_element(scores.begin() + static_cast<long>(bins[b].lo),
                                         scores.begin() + static_cast<long>(bins[b].hi));
      EXPECT_EQ(sel.indices[b], static_cast<Index>(best - scores.begin()));
    }
  }
}

// ---------------------------------------------------------------------------
// ADA: segment tree and quotas

TEST(SegmentTree, HandTrace) {
  const std::vector<double> s{0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.9, 0.9};
  const auto segs = segment_tree(s, params(4, 2, 0.5));
  ASSERT_EQ(segs.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(segs[i].range, (Range{2 * i, 2 * i + 2}));
    EXPECT_EQ(segs[i].depth, 2);
    EXPECT_EQ(segs[i].quota_hint, 1u);
    EXPECT_TRUE(segs[i].completed);
  }
}

TEST(SegmentTree, ZeroThresholdOrSingleFrameBudgetKeepsRoot) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = aks::testing::random_scores(rng, 1 + rng.integer(0, 200));
    const auto zero = segment_tree(s, params(1 + rng.integer(0, 40), 6, 0.0));
    ASSERT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero[0].range, (Range{0, s.size()}));
    const auto one = segment_tree(s, params(1, 6, 1e9));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].range, (Range{0, s.size()}));
  }
}

TEST(SegmentTree, CompletedSegmentsPartitionTheAxis) {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t t = 1 + rng.integer(0, 300);
    const auto s = aks::testing::random_scores(rng, t);
    const auto p = params(1 + rng.integer(0, 64), static_cast<int>(rng.integer(0, 7)), rng.uniform(0, 0.6));
    const auto segs = segment_tree(s, p);
    Index cursor = 0;
    for (const auto& seg : segs) {
      EXPECT_EQ(seg.range.lo, cursor);
      EXPECT_LT(seg.range.lo, seg.range.hi);
      EXPECT_LE(seg.depth, p.max_level);
      EXPECT_TRUE(seg.completed);
      EXPECT_GE(seg.quota_hint, 1u);
      cursor = seg.range.hi;
    }
    EXPECT_EQ(cursor, t);
  }
}

TEST(AllocateQuotas, Examples) {
  EXPECT_EQ(allocate_quotas(std::vector<std::size_t>{2, 2, 2, 2}, 4), (std::vector<std::size_t>{1, 1, 1, 1}));
  EXPECT_EQ(allocate_quotas(std::vector<std::size_t>{3, 5}, 4), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(allocate_quotas(std::vector<std::size_t>{1, 7}, 4), (std::vector<std::size_t>{1, 3}));
  EXPECT_THROW(allocate_quotas(std::vector<std::size_t>{1, 1}, 3), Error);
}

TEST(AllocateQuotas, SumsToBudgetWithinCapacity) {
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::size_t> lengths(1 + rng.integer(0, 12));
    for (auto& l : lengths) l = 1 + rng.integer(0, 30);
    const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
    const std::size_t m = rng.integer(0, total);
    const auto q = allocate_quotas(lengths, m);
    EXPECT_EQ(std::accumulate(q.begin(), q.end(), std::size_t{0}), m);
    for (std::size_t i = 0; i < q.size(); ++i) {
      EXPECT_LE(q[i], lengths[i]);
      // within one frame of the exact proportional share
      const double share = static_cast<double>(m * lengths[i]) / static_cast<double>(total);
      EXPECT_LT(std::abs(static_cast<double>(q[i]) - share), 1.0);
    }
  }
}

// ---------------------------------------------------------------------------
// ADA

TEST(SelectAda, Examples) {
  const auto s = series_of({0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.9, 0.9});
  EXPECT_EQ(select_ada(s, params(4, 2, 0.5)).indices, (Idx{0, 2, 4, 6}));
  EXPECT_EQ(select_ada(s, params(4, 2, 0.0)).indices, select_top(s, 4).indices);
  for (int l : {0, 1, 3, 6})
    for (double thr : {0.0, 0.3, 5.0})
      EXPECT_EQ(select_ada(series_of({0.9, 0.1, 0.1, 0.1}), params(1, l, thr)).indices, (Idx{0}));
}

TEST(SelectAda, BudgetAboveHorizonSelectsAll) {
  aks::testing::CaptureWarnings warnings;
  const auto sel = select_ada(series_of({0.3, 0.1, 0.2}), params(8, 3, 0.5));
  EXPECT_EQ(sel.indices, (Idx{0, 1, 2}));
  EXPECT_FALSE(warnings.messages.empty());
}

TEST(SelectAda, ShiftInvariant) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t t = 1 + rng.integer(0, 200);
    const auto s = trial % 3 == 0 ? aks::testing::tied_scores(rng, t) : aks::testing::random_scores(rng, t);
    const auto p = params(1 + rng.integer(0, 32), static_cast<int>(rng.integer(1, 6)), rng.uniform(0, 0.5));
    aks::testing::QuietWarnings quiet;
    const auto base = select_ada(series_of(s), p).indices;
    for (double c : {-5.0, 0.3, 1000.0}) {
      std::vector<double> shifted(s);
      for (auto& v : shifted) v += c;
      EXPECT_EQ(select_ada(series_of(shifted), p).indices, base) << "trial " << trial << " c " << c;
    }
  }
}

TEST(SelectAda, ZeroThresholdIsTop) {
  Rng rng(32);
  aks::testing::QuietWarnings quiet;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t t = 1 + rng.integer(0, 300);
    const auto s = trial % 2 ? aks::testing::tied_scores(rng, t) : aks::testing::random_scores(rng, t);
    const std::size_t m = 1 + rng.integer(0, 64);
    const auto series = series_of(s);
    EXPECT_EQ(select_ada(series, params(m, static_cast<int>(rng.integer(0, 6)), 0.0)).indices,
              select_top(series, m).indices);
  }
}

TEST(SelectAda, HugeThresholdReachesBin) {
  Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    const int l = static_cast<int>(rng.integer(1, 4));
    const std::size_t m = std::size_t{1} << l;
    const std::size_t t = m + rng.integer(0, 200);
    const auto s = aks::testing::distinct_scores(rng, t);
    const auto series = series_of(s);
    const double thr = *std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()) + 1.0;
    EXPECT_EQ(select_ada(series, params(m, l, thr)).indices, select_bin(series, m, l).indices)
        << "T=" << t << " M=" << m;
  }
}

TEST(Strategies, AlwaysWellFormed) {
  Rng rng(34);
  aks::testing::QuietWarnings quiet;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t t = 1 + rng.integer(0, 150);
    const auto s = trial % 2 ? aks::testing::tied_scores(rng, t) : aks::testing::random_scores(rng, t);
    const auto series = series_of(s);
    const auto p = params(1 + rng.integer(0, 80), static_cast<int>(rng.integer(0, 8)), rng.uniform(0, 0.8));
    for (auto strategy : {Strategy::UNI, Strategy::TOP, Strategy::BIN, Strategy::ADA}) {
      const auto a = select(series, strategy, p);
      expect_well_formed(a, t, p.m);
      EXPECT_EQ(a.strategy, strategy);
      EXPECT_EQ(select(series, strategy, p), a);
    }
  }
}

TEST(Strategies, UniIgnoresScores) {
  Rng rng(35);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = 1 + rng.integer(0, 100);
    auto s = aks::testing::random_scores(rng, t);
    const auto p = params(1 + rng.integer(0, t - 1 + 1), 2, 0.5);
    const auto before = select(series_of(s), Strategy::UNI, p).indices;
    std::reverse(s.begin(), s.end());
    EXPECT_EQ(select(series_of(s), Strategy::UNI, p).indices, before);
  }
}

// ---------------------------------------------------------------------------
// objective

TEST(Objective, Examples) {
  const auto s = series_of({0.9, 0.8, 0.1, 0.2});
  const KeyframeSelection balanced{{0, 3}, Strategy::ORACLE, {}, 4, ""};
  const KeyframeSelection lopsided{{0, 1}, Strategy::ORACLE, {}, 4, ""};
  EXPECT_NEAR(objective(s, balanced, 1.0, 1), 1.1, 1e-12);
  EXPECT_NEAR(objective(s, lopsided, 1.0, 1), -0.3, 1e-12);
  EXPECT_EQ(objective(s, lopsided, 0.0, 1), 0.9 + 0.8);
  EXPECT_THROW(objective(s, lopsided, -1.0, 1), Error);
}

TEST(SelectKeyframes, MapsResampledIndicesBack) {
  aks::testing::QuietWarnings quiet;
  std::vector<double> s(20, 0.0);
  s[6] = 1.0;   // kept at stride 2
  s[7] = 5.0;   // dropped at stride 2
  s[14] = 0.5;
  const auto series = ScoreSeries::from_scores(s, 2.0);
  const auto sel = select_keyframes(series, Strategy::TOP, params(2, 1, 0.5), 1.0);
  EXPECT_EQ(sel.horizon, 20u);
  EXPECT_EQ(sel.indices, (Idx{6, 14}));
}
