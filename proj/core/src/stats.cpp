#include "chartpipe/stats.h"

#include <algorithm>

#include "chartpipe/text.h"

namespace chartpipe {

namespace {

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool any_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& phrases) {
  return std::any_of(phrases.begin(), phrases.end(),
                     [&](const std::string& p) { return contains_run(tokens, text::word_tokens(p)); });
}

}  // namespace

StatsOptions StatsOptions::defaults() {
  StatsOptions o;
  o.chart_keywords = {"bar",     "bars",        "bar chart",    "histogram", "pie",    "pie chart",
                      "line",    "lines",       "line chart",   "scatter",   "scatterplot", "scatter plot",
                      "stacked", "grouped"};
  o.aggregation_keywords = {"number of", "count",   "how many", "average", "mean",    "sum",
                            "total",     "maximum", "max",      "minimum", "min",     "highest",
                            "lowest"};
  return o;
}

std::vector<std::string> required_columns(const VisSpec& spec) {
  std::vector<std::string> out;
  auto add = [&](const std::string& c) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const std::string& s) { return text::iequals(s, c); });
    if (!seen) out.push_back(c);
  };
  add(spec.x.column);
  add(spec.y.column);
  if (spec.color) add(*spec.color);
  if (spec.filter) {
    for (const auto& c : filter_columns(*spec.filter)) add(c);
  }
  return out;
}

bool mentions_phrase(const std::string& utterance, const std::string& phrase) {
  return contains_run(text::word_tokens(utterance), text::word_tokens(phrase));
}

DatasetStats dataset_stats(const std::vector<EvalTriplet>& triplets, const StatsOptions& options) {
  DatasetStats out;
  for (const auto& t : triplets) {
    UtteranceStats s;
    s.id = t.id;
    const auto tokens = text::word_tokens(t.utterance);
    const auto required = required_columns(t.truth);
    s.required_columns = required.size();
    for (const auto& c : required) {
      if (contains_run(tokens, text::word_tokens(c))) ++s.mentioned_columns;
    }
    s.column_ratio = required.empty() ? 0.0 : static_cast<double>(s.mentioned_columns) / required.size();
    s.explicit_chart_type = any_phrase(tokens, options.chart_keywords);
    s.explicit_aggregation = any_phrase(tokens, options.aggregation_keywords);
    out.mean_column_ratio += s.column_ratio;
    out.explicit_chart_type_rate += s.explicit_chart_type;
    out.explicit_aggregation_rate += s.explicit_aggregation;
    out.items.push_back(std::move(s));
  }
  if (!out.items.empty()) {
    const double n = static_cast<double>(out.items.size());
    out.mean_column_ratio /= n;
    out.explicit_chart_type_rate /= n;
    out.explicit_aggregation_rate /= n;
  }
  return out;
}

Json stats_to_json(const DatasetStats& stats) {
  Json items = Json::array();
  for (const auto& s : stats.items) {
    items.push_back({{"id", s.id},
                     {"required_columns", s.required_columns},
                     {"mentioned_columns", s.mentioned_columns},
                     {"column_ratio", s.column_ratio},
                     {"explicit_chart_type", s.explicit_chart_type},
                     {"explicit_aggregation", s.explicit_aggregation}});
  }
  return Json{{"n_examples", stats.items.size()},
              {"mean_column_ratio", stats.mean_column_ratio},
              {"explicit_chart_type_rate", stats.explicit_chart_type_rate},
              {"explicit_aggregation_rate", stats.explicit_aggregation_rate},
              {"items", std::move(items)}};
}

}  // namespace chartpipe
