#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmark/grounding_client.hpp"

namespace vmark {

struct MrItem {
  std::string item_id;
  TemporalSpan gold;                      // seconds
  std::optional<TemporalSpan> prediction; // seconds; nullopt scores as a parse error
};

struct HdItem {
  std::string item_id;
  std::vector<std::pair<int, double>> gold;  // (clip index, gold saliency)
  std::optional<HighlightPrediction> prediction;
};

struct HdOptions {
  double relevance_threshold = 3.0;
  bool hit_counts_items_without_relevant = false;
};

struct EvalReport {
  Task task = Task::moment_retrieval;
  std::vector<std::pair<double, double>> r_at;  // (IoU threshold, recall), ascending thresholds
  double miou = 0.0;
  double map = 0.0;
  double hit_at_1 = 0.0;
  int n_items = 0;
  int n_parse_errors = 0;
  int n_skipped_ap = 0;   // HD items without a relevant clip
  int n_skipped_hit = 0;
};

inline const std::vector<double> kDefaultIouThresholds = {0.3, 0.5, 0.7};

/// Interval IoU. Zero-length spans score 1 only against the identical
/// point. Throws InputError on mixed units or reversed spans.
double temporal_iou(const TemporalSpan& a, const TemporalSpan& b);

/// Clip indices in rank order: predicted clips by saliency (descending, ties
/// by clip index), then gold-only clips by clip index.
std::vector<int> rank_clips(const std::vector<std::pair<int, double>>& gold,
                            const HighlightPrediction& prediction);

/// Mean of precision@k over the relevant positions of a ranking; 0 when
/// nothing is relevant.
double average_precision(const std::vector<bool>& relevant_in_rank_order);

EvalReport moment_retrieval_report(const std::vector<MrItem>& items,
                                   const std::vector<double>& thresholds = kDefaultIouThresholds);
EvalReport highlight_report(const std::vector<HdItem>& items, const HdOptions& options = {});

nlohmann::json to_json(const EvalReport& report);

struct TableRow {
  std::string block;              // optional sub-block heading
  std::vector<std::string> keys;  // one cell per key column
  EvalReport report;
};

/// Aligned plain-text table; metric values in percent with two decimals.
/// A heading line is emitted whenever the block name changes.
std::string format_table(const std::vector<std::string>& key_headers, const std::vector<TableRow>& rows);
std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

}  // namespace vmark
