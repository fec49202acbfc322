#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chartpipe/dsl.h"
#include "chartpipe/json.h"
#include "chartpipe/table.h"

namespace chartpipe {

/// Slot-wise equality: mark, both fields with their aggregations, color,
/// filter and sort. Column names compare case-insensitively. Filters compare
/// up to operand order of and/or unless `strict_filter_order`. Two scatter
/// specs (grouped or not) are also consistent when they agree after
/// swapping their x and y fields.
bool consistent(const VisSpec& a, const VisSpec& b, bool strict_filter_order = false);

struct EvalTriplet {
  std::string id;
  std::shared_ptr<const DataTable> table;
  std::string utterance;
  VisSpec truth;
  /// easy | medium | hard | extra_hard | unknown
  std::string hardness = "unknown";
};

/// One ranked prediction; nullopt when it could not be parsed at all.
using Prediction = std::optional<VisSpec>;

struct PredictionSet {
  std::string id;
  std::vector<Prediction> ranked;
};

struct ExampleScore {
  std::string id;
  std::string hardness;
  bool valid = false;
  bool consistent_at_1 = false;
  bool consistent_at_3 = false;
  double rouge_l = 0.0;
  double bleu = 0.0;
};

struct MetricMeans {
  size_t n = 0;
  double valid = 0.0;
  double consistent_at_1 = 0.0;
  double consistent_at_3 = 0.0;
  double rouge_l = 0.0;
  double bleu = 0.0;
};

struct EvalReport {
  std::vector<ExampleScore> examples;
  MetricMeans overall;
  /// Keyed by hardness, in order of first appearance.
  std::vector<std::pair<std::string, MetricMeans>> by_hardness;
  bool strict_filter_order = false;
};

struct EvalOptions {
  bool strict_filter_order = false;
  /// 0 picks the hardware concurrency.
  size_t threads = 0;
};

/// Scores every triplet against the prediction set with the same id. A
/// prediction that is missing, unparsed or fails validation against the
/// triplet's table scores 0 on every metric. Throws AlignmentError when
/// the ids of the two lists do not match one to one.
EvalReport evaluate_run(const std::vector<EvalTriplet>& triplets, const std::vector<PredictionSet>& predictions,
                        const EvalOptions& options = {});

/// {"metric_config", "strict_filter_order", "n_examples", "aggregate", "by_hardness", "examples"}
Json report_to_json(const EvalReport& report);

/// Fixed-width text table of the aggregates.
std::string format_report_table(const EvalReport& report);

}  // namespace chartpipe
