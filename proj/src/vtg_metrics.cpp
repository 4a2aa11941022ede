#include "vmark/vtg_metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "vmark/errors.hpp"

namespace vmark {

double temporal_iou(const TemporalSpan& a, const TemporalSpan& b) {
  if (a.unit != b.unit) throw InputError("temporal_iou on spans with different units");
  if (a.end < a.start || b.end < b.start) throw InputError("temporal_iou on a reversed span");
  if (a.start == a.end || b.start == b.end) return a == b ? 1.0 : 0.0;
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<int> rank_clips(const std::vector<std::pair<int, double>>& gold,
                            const HighlightPrediction& prediction) {
  auto predicted = prediction.entries;
  std::stable_sort(predicted.begin(), predicted.end(), [](const auto& x, const auto& y) {
    return x.second != y.second ? x.second > y.second : x.first < y.first;
  });
  std::vector<int> order;
  std::set<int> seen;
  for (const auto& [clip, score] : predicted) {
    if (seen.insert(clip).second) order.push_back(clip);
  }
  std::set<int> rest;
  for (const auto& [clip, score] : gold) {
    if (!seen.count(clip)) rest.insert(clip);
  }
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

double average_precision(const std::vector<bool>& relevant_in_rank_order) {
  double sum = 0.0;
  int hits = 0;
  for (size_t k = 0; k < relevant_in_rank_order.size(); ++k) {
    if (!relevant_in_rank_order[k]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return hits ? sum / hits : 0.0;
}

EvalReport moment_retrieval_report(const std::vector<MrItem>& items, const std::vector<double>& thresholds) {
  EvalReport r;
  r.task = Task::moment_retrieval;
  std::vector<double> sorted = thresholds;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> hits(sorted.size(), 0);
  double iou_sum = 0.0;
  for (const auto& item : items) {
    double iou = 0.0;
    if (item.prediction) {
      iou = temporal_iou(item.gold, *item.prediction);
    } else {
      ++r.n_parse_errors;
    }
    iou_sum += iou;
    for (size_t i = 0; i < sorted.size(); ++i) hits[i] += iou >= sorted[i] ? 1 : 0;
  }
  r.n_items = static_cast<int>(items.size());
  const double n = std::max(1, r.n_items);
  for (size_t i = 0; i < sorted.size(); ++i) r.r_at.emplace_back(sorted[i], hits[i] / n);
  r.miou = iou_sum / n;
  return r;
}

EvalReport highlight_report(const std::vector<HdItem>& items, const HdOptions& options) {
  EvalReport r;
  r.task = Task::highlight_detection;
  r.n_items = static_cast<int>(items.size());
  double ap_sum = 0.0, hit_sum = 0.0;
  int ap_n = 0, hit_n = 0;
  for (const auto& item : items) {
    std::map<int, double> gold(item.gold.begin(), item.gold.end());
    const bool any_relevant = std::any_of(gold.begin(), gold.end(), [&](const auto& g) {
      return g.second >= options.relevance_threshold;
    });
    if (!item.prediction) ++r.n_parse_errors;
    const bool empty = !item.prediction || item.prediction->entries.empty();

    double ap = 0.0, hit = 0.0;
    if (!empty) {
      std::vector<bool> rel;
      for (int clip : rank_clips(item.gold, *item.prediction)) {
        const auto g = gold.find(clip);
        rel.push_back(g != gold.end() && g->second >= options.relevance_threshold);
      }
      ap = average_precision(rel);
      hit = !rel.empty() && rel.front() ? 1.0 : 0.0;
    }
    if (any_relevant) {
      ap_sum += ap;
      ++ap_n;
    } else {
      ++r.n_skipped_ap;
    }
    if (any_relevant || options.hit_counts_items_without_relevant) {
      hit_sum += hit;
      ++hit_n;
    } else {
      ++r.n_skipped_hit;
    }
  }
  r.map = ap_n ? ap_sum / ap_n : 0.0;
  r.hit_at_1 = hit_n ? hit_sum / hit_n : 0.0;
  return r;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["task"] = std::string(to_string(report.task));
  j["n_items"] = report.n_items;
  j["n_parse_errors"] = report.n_parse_errors;
  if (report.task == Task::moment_retrieval) {
    nlohmann::json r = nlohmann::json::object();
    for (const auto& [t, v] : report.r_at) r[fmt::format("{:g}", t)] = v;
    j["r_at"] = r;
    j["miou"] = report.miou;
  } else {
    j["map"] = report.map;
    j["hit_at_1"] = report.hit_at_1;
    j["n_skipped_ap"] = report.n_skipped_ap;
    j["n_skipped_hit"] = report.n_skipped_hit;
  }
  return j;
}

std::string format_table(const std::vector<std::string>& key_headers, const std::vector<TableRow>& rows) {
  std::vector<size_t> widths;
  for (const auto& h : key_headers) widths.push_back(h.size());
  for (const auto& row : rows) {
    if (row.keys.size() != widths.size()) throw InputError("table row has the wrong number of keys");
    for (size_t i = 0; i < widths.size(); ++i) widths[i] = std::max(widths[i], row.keys[i].size());
  }
  const bool mr = rows.empty() || rows.front().report.task == Task::moment_retrieval;
  std::vector<std::string> metrics;
  if (mr) {
    const auto& thresholds = rows.empty() ? EvalReport{}.r_at : rows.front().report.r_at;
    if (rows.empty()) {
      for (double t : kDefaultIouThresholds) metrics.push_back(fmt::format("R@{:g}", t));
    }
    for (const auto& [t, v] : thresholds) metrics.push_back(fmt::format("R@{:g}", t));
    metrics.push_back("mIoU");
  } else {
    metrics = {"mAP", "HIT@1"};
  }

  auto keys_line = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) line += fmt::format("{}{:<{}}", i ? "  " : "", cells[i], widths[i]);
    return line;
  };
  std::string out = keys_line(key_headers);
  for (const auto& m : metrics) out += fmt::format("  {:>7}", m);
  out += "\n";
  std::string block;
  for (const auto& row : rows) {
    if (!row.block.empty() && row.block != block) {
      block = row.block;
      out += block + "\n";
    }
    out += keys_line(row.keys);
    if (mr) {
      for (const auto& [t, v] : row.report.r_at) out += fmt::format("  {:>7.2f}", 100.0 * v);
      out += fmt::format("  {:>7.2f}", 100.0 * row.report.miou);
    } else {
      out += fmt::format("  {:>7.2f}  {:>7.2f}", 100.0 * row.report.map, 100.0 * row.report.hit_at_1);
    }
    out += "\n";
  }
  return out;
}

std::string format_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::vector<TableRow> table;
  for (const auto& [key, rep] : rows) table.push_back({"", {key}, rep});
  return format_table({"Config"}, table);
}

}  // namespace vmark
