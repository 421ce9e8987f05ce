#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cmstress/corpus.hpp"
#include "cmstress/errors.hpp"

namespace cmstress {

struct ConfusionMatrix {
  // rows: true label, columns: predicted label, canonical order
  std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels> counts{};

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts) {
      for (auto c : row) t += c;
    }
    return t;
  }

  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < kNumLabels; ++i) t += counts[i][i];
    return t;
  }

  std::uint64_t row_sum(std::size_t row) const {
    std::uint64_t t = 0;
    for (auto c : counts[row]) t += c;
    return t;
  }

  std::uint64_t col_sum(std::size_t col) const {
    std::uint64_t t = 0;
    for (const auto& row : counts) t += row[col];
    return t;
  }
};

inline ConfusionMatrix confusion(const std::vector<Label>& y_true,
                                 const std::vector<Label>& y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw LengthMismatchError("confusion needs equal-length label lists, got " +
                              std::to_string(y_true.size()) + " and " +
                              std::to_string(y_pred.size()));
  }
  if (y_true.empty()) {
    throw LengthMismatchError("confusion needs at least one (true, predicted) pair");
  }
  ConfusionMatrix cm;
  for (std::size_t k = 0; k < y_true.size(); ++k) {
    ++cm.counts[label_index(y_true[k])][label_index(y_pred[k])];
  }
  return cm;
}

struct PerClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct AverageMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  ConfusionMatrix cm;
  std::array<PerClassMetrics, kNumLabels> per_class{};
  AverageMetrics macro;
  AverageMetrics weighted;
  double accuracy = 0.0;
};

// Per-class precision/recall/F1 with 0/0 defined as 0, macro averages over
// both schema labels always (zero-support classes included), weighted
// averages by true-label support, accuracy = trace/total.
inline MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw EmptyMatrixError("cannot compute metrics of an empty matrix");
  MetricsReport report;
  report.cm = cm;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    const auto tp = static_cast<double>(cm.counts[c][c]);
    const auto predicted = static_cast<double>(cm.col_sum(c));
    const auto support = cm.row_sum(c);
    auto& pc = report.per_class[c];
    pc.support = support;
    pc.precision = predicted > 0.0 ? tp / predicted : 0.0;
    pc.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    const double pr = pc.precision + pc.recall;
    pc.f1 = pr > 0.0 ? 2.0 * pc.precision * pc.recall / pr : 0.0;

    report.macro.precision += pc.precision / kNumLabels;
    report.macro.recall += pc.recall / kNumLabels;
    report.macro.f1 += pc.f1 / kNumLabels;
    const double w = static_cast<double>(support) / static_cast<double>(total);
    report.weighted.precision += w * pc.precision;
    report.weighted.recall += w * pc.recall;
    report.weighted.f1 += w * pc.f1;
  }
  report.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  return report;
}

// The seven aggregate metric names, in report column order.
inline constexpr std::array<std::string_view, 7> kMetricNames = {
    "macro_f1",    "macro_recall",    "macro_precision", "weighted_f1",
    "weighted_recall", "weighted_precision", "accuracy"};

inline double metric_value(const MetricsReport& report, std::string_view name) {
  if (name == "macro_f1") return report.macro.f1;
  if (name == "macro_recall") return report.macro.recall;
  if (name == "macro_precision") return report.macro.precision;
  if (name == "weighted_f1") return report.weighted.f1;
  if (name == "weighted_recall") return report.weighted.recall;
  if (name == "weighted_precision") return report.weighted.precision;
  if (name == "accuracy") return report.accuracy;
  throw UnknownMetricError("unknown metric \"" + std::string(name) + "\"");
}

// Rounds half-to-even to three decimals (the table precision). Relies on
// the default FP environment, whose nearbyint mode is round-to-nearest,
// ties-to-even.
inline std::string format_3dp(double v) {
  const auto n = static_cast<long long>(std::nearbyint(v * 1000.0));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%03lld", n / 1000, n % 1000);
  return buf;
}

inline constexpr std::string_view kTableHeader =
    "Macro F1-score Macro Recall Macro Precision Weighted F1-score Weighted Recall "
    "Weighted Precision Accuracy";

// The seven aggregates as one space-separated row, 3-decimal precision.
inline std::string metrics_row(const MetricsReport& report) {
  std::string row;
  for (std::size_t i = 0; i < kMetricNames.size(); ++i) {
    if (i > 0) row += ' ';
    row += format_3dp(metric_value(report, kMetricNames[i]));
  }
  return row;
}

inline nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json labels = nlohmann::json::array();
  for (auto name : kLabelNames) labels.push_back(std::string(name));
  nlohmann::json confusion_rows = nlohmann::json::array();
  for (const auto& row : report.cm.counts) confusion_rows.push_back(row);
  nlohmann::json per_class;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    per_class[std::string(kLabelNames[c])] = {
        {"precision", report.per_class[c].precision},
        {"recall", report.per_class[c].recall},
        {"f1", report.per_class[c].f1},
        {"support", report.per_class[c].support},
    };
  }
  return {
      {"labels", std::move(labels)},
      {"confusion", std::move(confusion_rows)},
      {"per_class", std::move(per_class)},
      {"macro",
       {{"precision", report.macro.precision},
        {"recall", report.macro.recall},
        {"f1", report.macro.f1}}},
      {"weighted",
       {{"precision", report.weighted.precision},
        {"recall", report.weighted.recall},
        {"f1", report.weighted.f1}}},
      {"accuracy", report.accuracy},
  };
}

inline MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport report;
  const auto& confusion_rows = j.at("confusion");
  for (std::size_t r = 0; r < kNumLabels; ++r) {
    report.cm.counts[r] = confusion_rows.at(r).get<std::array<std::uint64_t, kNumLabels>>();
  }
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    const auto& pc = j.at("per_class").at(std::string(kLabelNames[c]));
    report.per_class[c].precision = pc.at("precision").get<double>();
    report.per_class[c].recall = pc.at("recall").get<double>();
    report.per_class[c].f1 = pc.at("f1").get<double>();
    report.per_class[c].support = pc.at("support").get<std::uint64_t>();
  }
  report.macro.precision = j.at("macro").at("precision").get<double>();
  report.macro.recall = j.at("macro").at("recall").get<double>();
  report.macro.f1 = j.at("macro").at("f1").get<double>();
  report.weighted.precision = j.at("weighted").at("precision").get<double>();
  report.weighted.recall = j.at("weighted").at("recall").get<double>();
  report.weighted.f1 = j.at("weighted").at("f1").get<double>();
  report.accuracy = j.at("accuracy").get<double>();
  return report;
}

enum class RenderStyle { kTable3, kTable4, kJson };

inline RenderStyle render_style_from_string(std::string_view s) {
  if (s == "table3") return RenderStyle::kTable3;
  if (s == "table4") return RenderStyle::kTable4;
  if (s == "json") return RenderStyle::kJson;
  throw InvalidParamsError("unknown render style \"" + std::string(s) + "\"");
}

// table3: header line plus the metric row. table4: the bare row (callers
// prepend their own leading cells). json: the full-precision document.
inline std::string render_metrics(const MetricsReport& report, RenderStyle style) {
  switch (style) {
    case RenderStyle::kTable3:
      return std::string(kTableHeader) + "\n" + metrics_row(report) + "\n";
    case RenderStyle::kTable4:
      return metrics_row(report) + "\n";
    case RenderStyle::kJson:
    default:
      return metrics_to_json(report).dump(2) + "\n";
  }
}

}  // namespace cmstress
