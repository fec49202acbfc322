#pragma once

#include <string>
#include <vector>

#include "chartpipe/eval.h"
#include "chartpipe/json.h"

namespace chartpipe {

struct StatsOptions {
  /// Phrases matched as whole-token runs, case-insensitively.
  std::vector<std::string> chart_keywords;
  std::vector<std::string> aggregation_keywords;

  static StatsOptions defaults();
};

struct UtteranceStats {
  std::string id;
  size_t required_columns = 0;
  size_t mentioned_columns = 0;
  /// mentioned / required; 0 when nothing is required.
  double column_ratio = 0.0;
  bool explicit_chart_type = false;
  bool explicit_aggregation = false;
};

struct DatasetStats {
  std::vector<UtteranceStats> items;
  double mean_column_ratio = 0.0;
  double explicit_chart_type_rate = 0.0;
  double explicit_aggregation_rate = 0.0;
};

/// Columns a chart needs: the distinct columns on x, y, color and in the
/// filter, in that order.
std::vector<std::string> required_columns(const VisSpec& spec);

/// True when the column's word tokens occur as a contiguous run of the
/// utterance's word tokens.
bool mentions_phrase(const std::string& utterance, const std::string& phrase);

DatasetStats dataset_stats(const std::vector<EvalTriplet>& triplets, const StatsOptions& options = StatsOptions::defaults());

Json stats_to_json(const DatasetStats& stats);

}  // namespace chartpipe
