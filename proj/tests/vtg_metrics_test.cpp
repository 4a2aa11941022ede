#include "vmark/vtg_metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "vmark/errors.hpp"

namespace vmark {
namespace {

TemporalSpan sec(double a, double b) { return {a, b, SpanUnit::second}; }

using oracle::grid_iou;

TEST(TemporalIou, WorkedExamples) {
  EXPECT_DOUBLE_EQ(temporal_iou(sec(2, 6), sec(2, 6)), 1.0);
  EXPECT_DOUBLE_EQ(temporal_iou(sec(0, 1), sec(2, 3)), 0.0);
  EXPECT_NEAR(temporal_iou(sec(2, 6), sec(4, 8)), 2.0 / 6.0, 1e-12);
  EXPECT_NEAR(grid_iou(sec(2, 6), sec(4, 8)), temporal_iou(sec(2, 6), sec(4, 8)), 1e-6);
  EXPECT_DOUBLE_EQ(temporal_iou(sec(3, 3), sec(3, 3)), 1.0);
  EXPECT_DOUBLE_EQ(temporal_iou(sec(3, 3), sec(2, 4)), 0.0);
  EXPECT_THROW(temporal_iou(sec(1, 2), TemporalSpan{1, 2, SpanUnit::frame}), InputError);
  EXPECT_THROW(temporal_iou(sec(2, 1), sec(1, 2)), InputError);
}

TEST(TemporalIou, AgreesWithGridOracle) {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> tick(0, 20000);  // 0..2 s on the 1e-4 grid
  for (int i = 0; i < 1000; ++i) {
    int a0 = tick(rng), a1 = tick(rng), b0 = tick(rng), b1 = tick(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    if (a0 == a1) ++a1;
    if (b0 == b1) ++b1;
    const auto a = sec(a0 * 1e-4, a1 * 1e-4), b = sec(b0 * 1e-4, b1 * 1e-4);
    const double iou = temporal_iou(a, b);
    ASSERT_NEAR(iou, grid_iou(a, b), 1e-6);
    ASSERT_DOUBLE_EQ(iou, temporal_iou(b, a));
    ASSERT_GE(iou, 0.0);
    ASSERT_LE(iou, 1.0);
    // Shifting both spans by the same offset changes nothing.
    ASSERT_NEAR(iou, temporal_iou(sec(a.start + 7.25, a.end + 7.25), sec(b.start + 7.25, b.end + 7.25)), 1e-9);
  }
}

TEST(MomentReport, WorkedExamples) {
  // IoUs 0.6 and 0.4 against gold [0, 10].
  const std::vector<MrItem> items = {{"a", sec(0, 10), sec(0, 6)}, {"b", sec(0, 10), sec(0, 4)}};
  const EvalReport r = moment_retrieval_report(items);
  ASSERT_EQ(r.r_at.size(), 3u);
  EXPECT_DOUBLE_EQ(r.r_at[0].second, 1.0);
  EXPECT_DOUBLE_EQ(r.r_at[1].second, 0.5);
  EXPECT_DOUBLE_EQ(r.r_at[2].second, 0.0);
  EXPECT_NEAR(r.miou, 0.5, 1e-12);

  const EvalReport errors = moment_retrieval_report({{"a", sec(0, 1), std::nullopt}, {"b", sec(0, 1), std::nullopt}});
  EXPECT_EQ(errors.n_parse_errors, 2);
  EXPECT_EQ(errors.miou, 0.0);
  for (const auto& [t, v] : errors.r_at) EXPECT_EQ(v, 0.0);

  const EvalReport one = moment_retrieval_report({{"a", sec(1, 2), sec(1, 2)}});
  for (const auto& [t, v] : one.r_at) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(one.miou, 1.0);
}

TEST(MomentReport, RecallIsMonotoneAndOrderFree) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0, 30);
  for (int s = 0; s < 100; ++s) {
    std::vector<MrItem> items;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 30); i < n; ++i) {
      double a = u(rng), b = u(rng) + 0.01, c = u(rng), d = u(rng) + 0.01;
      if (a > b) std::swap(a, b);
      if (c > d) std::swap(c, d);
      items.push_back({std::to_string(i), sec(a, b), rng() % 7 ? std::optional(sec(c, d)) : std::nullopt});
    }
    const EvalReport r = moment_retrieval_report(items);
    ASSERT_GE(r.r_at[0].second, r.r_at[1].second);
    ASSERT_GE(r.r_at[1].second, r.r_at[2].second);
    std::shuffle(items.begin(), items.end(), rng);
    const EvalReport shuffled = moment_retrieval_report(items);
    ASSERT_EQ(shuffled.r_at, r.r_at);
    ASSERT_NEAR(shuffled.miou, r.miou, 1e-12);
  }
}

TEST(AveragePrecision, WorkedExampleAndExhaustiveCheck) {
  EXPECT_NEAR(average_precision({true, false, true}), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(average_precision({true, false, true}), 0.8333, 1e-4);
  EXPECT_EQ(average_precision({true, true, false}), 1.0);
  EXPECT_EQ(average_precision({false, false}), 0.0);
  for (int n = 1; n <= 8; ++n) {
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      std::vector<bool> rel(n);
      for (int k = 0; k < n; ++k) rel[k] = (bits >> k) & 1u;
      ASSERT_NEAR(average_precision(rel), oracle::average_precision(rel), 1e-12);
    }
  }
}

TEST(HighlightReport, RankingRules) {
  // Ties break on clip index; clips the model never scored rank last.
  HighlightPrediction p{{{5, 2.0}, {1, 3.0}, {3, 2.0}}};
  EXPECT_EQ(rank_clips({{0, 1}, {1, 4}, {7, 4}}, p), (std::vector<int>{1, 3, 5, 0, 7}));
}

TEST(HighlightReport, WorkedExamples) {
  const std::vector<std::pair<int, double>> gold = {{0, 4}, {1, 0}, {2, 3}, {3, 1}};
  // Ranking [0 rel, 1 irrel, 2 rel] -> AP 0.8333, HIT 1.
  HdItem ranked{"a", gold, HighlightPrediction{{{0, 4}, {1, 3}, {2, 2}}}};
  // Perfect ranking.
  HdItem perfect{"b", gold, HighlightPrediction{{{2, 4}, {0, 3.5}}}};
  // Top clip irrelevant; ranking [3, 0, 1, 2] = [irrel, rel, irrel, rel].
  HdItem miss{"c", gold, HighlightPrediction{{{3, 4}, {0, 1}}}};
  const EvalReport r = highlight_report({ranked, perfect, miss});
  const double ap_c = (1.0 / 2.0 + 2.0 / 4.0) / 2.0;
  EXPECT_NEAR(r.map, ((1.0 + 2.0 / 3.0) / 2.0 + 1.0 + ap_c) / 3.0, 1e-12);
  EXPECT_NEAR(r.hit_at_1, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(r.n_items, 3);
  EXPECT_EQ(r.task, Task::highlight_detection);
}

TEST(HighlightReport, SkipPolicyAndFailures) {
  HdItem none{"n", {{0, 1}, {1, 2}}, HighlightPrediction{{{0, 4}}}};
  HdItem good{"g", {{0, 4}}, HighlightPrediction{{{0, 4}}}};
  HdItem failed{"f", {{0, 4}}, std::nullopt};
  HdItem empty{"e", {{0, 4}}, HighlightPrediction{}};
  const EvalReport skip = highlight_report({none, good, failed, empty});
  EXPECT_EQ(skip.n_skipped_ap, 1);
  EXPECT_EQ(skip.n_skipped_hit, 1);
  EXPECT_EQ(skip.n_parse_errors, 1);
  EXPECT_NEAR(skip.map, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(skip.hit_at_1, 1.0 / 3.0, 1e-12);

  const EvalReport counted = highlight_report({none, good}, {3.0, true});
  EXPECT_EQ(counted.n_skipped_hit, 0);
  EXPECT_NEAR(counted.hit_at_1, 0.5, 1e-12);
  EXPECT_NEAR(counted.map, 1.0, 1e-12);
  // A lower threshold makes item "n" relevant.
  EXPECT_EQ(highlight_report({none}, {1.0, false}).n_skipped_ap, 0);
}

TEST(Report, JsonAndTable) {
  const EvalReport r = moment_retrieval_report({{"a", sec(0, 10), sec(0, 6)}, {"b", sec(0, 10), sec(0, 4)}});
  const auto j = to_json(r);
  EXPECT_EQ(j.at("task"), "mr");
  EXPECT_DOUBLE_EQ(j.at("r_at").at("0.5").get<double>(), 0.5);
  const std::string table = format_table({{"run", r}});
  EXPECT_EQ(table,
            "Config    R@0.3    R@0.5    R@0.7     mIoU\n"
            "run      100.00    50.00     0.00    50.00\n");
  const std::string blocks = format_table({"Size", "Color"}, {{"Sizes", {"20", "Black"}, r}, {"Sizes", {"38", "Red"}, r},
                                                             {"Colors", {"38", "Blue"}, r}});
  EXPECT_NE(blocks.find("Sizes\n20    Black"), std::string::npos) << blocks;
  EXPECT_NE(blocks.find("Colors\n38    Blue "), std::string::npos) << blocks;
  EXPECT_THROW(format_table({"A", "B"}, {{"", {"only one"}, r}}), InputError);

  const auto hd = format_table({{"hd", highlight_report({{"g", {{0, 4}}, HighlightPrediction{{{0, 4}}}}})}});
  EXPECT_EQ(hd, "Config      mAP    HIT@1\nhd       100.00   100.00\n");
}

}  // namespace
}  // namespace vmark
