#include "chartpipe/eval.h"

#include <algorithm>
#include <cstdio>
#include <future>
#include <thread>
#include <unordered_map>

#include "chartpipe/compiler.h"
#include "chartpipe/errors.h"
#include "chartpipe/metrics.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

std::string column_key(const std::string& c) { return text::to_lower(text::normalize_space(c)); }

bool same_field(const FieldRef& a, const FieldRef& b) {
  return a.aggregation == b.aggregation && column_key(a.column) == column_key(b.column);
}

bool ordered_equal(const FilterExpr& a, const FilterExpr& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() == FilterExpr::Kind::condition) {
    return column_key(a.cond().column) == column_key(b.cond().column) && a.cond().op == b.cond().op &&
           a.cond().literal == b.cond().literal;
  }
  return ordered_equal(a.lhs(), b.lhs()) && ordered_equal(a.rhs(), b.rhs());
}

bool same_filter(const std::optional<FilterExpr>& a, const std::optional<FilterExpr>& b, bool strict) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  if (strict) return ordered_equal(*a, *b);
  return commutative_key(*a) == commutative_key(*b);
}

bool same_rest(const VisSpec& a, const VisSpec& b, bool strict) {
  if (a.mark != b.mark || a.sort != b.sort) return false;
  if (a.color.has_value() != b.color.has_value()) return false;
  if (a.color && column_key(*a.color) != column_key(*b.color)) return false;
  return same_filter(a.filter, b.filter, strict);
}

TokenSeq as_tokens(const VisSpec& s, bool strict) {
  const auto seq = to_eval_sequence(s, strict);
  return TokenSeq(seq.begin(), seq.end());
}

ExampleScore score_one(const EvalTriplet& t, const PredictionSet* preds, bool strict) {
  ExampleScore out;
  out.id = t.id;
  out.hardness = t.hardness;
  if (!preds) return out;
  std::vector<const VisSpec*> valid;
  for (const auto& p : preds->ranked) {
    const VisSpec* spec = nullptr;
    if (p) {
      try {
        validate_spec(*p, *t.table);
        spec = &*p;
      } catch (const Error&) {
      }
    }
    valid.push_back(spec);
  }
  if (valid.empty() || !valid[0]) {
    for (size_t i = 1; i < std::min<size_t>(3, valid.size()); ++i) {
      if (valid[i] && consistent(*valid[i], t.truth, strict)) out.consistent_at_3 = true;
    }
    return out;
  }
  out.valid = true;
  out.consistent_at_1 = consistent(*valid[0], t.truth, strict);
  for (size_t i = 0; i < std::min<size_t>(3, valid.size()); ++i) {
    if (valid[i] && consistent(*valid[i], t.truth, strict)) out.consistent_at_3 = true;
  }
  const auto cand = as_tokens(*valid[0], strict);
  const auto ref = as_tokens(t.truth, strict);
  out.rouge_l = rouge_l(cand, ref);
  out.bleu = bleu(cand, ref);
  return out;
}

void accumulate(MetricMeans& m, const ExampleScore& e) {
  ++m.n;
  m.valid += e.valid;
  m.consistent_at_1 += e.consistent_at_1;
  m.consistent_at_3 += e.consistent_at_3;
  m.rouge_l += e.rouge_l;
  m.bleu += e.bleu;
}

void finish(MetricMeans& m) {
  if (m.n == 0) return;
  const double n = static_cast<double>(m.n);
  m.valid /= n;
  m.consistent_at_1 /= n;
  m.consistent_at_3 /= n;
  m.rouge_l /= n;
  m.bleu /= n;
}

Json means_json(const MetricMeans& m) {
  return Json{{"n", m.n},
              {"valid", m.valid},
              {"consistent_at_1", m.consistent_at_1},
              {"consistent_at_3", m.consistent_at_3},
              {"rouge_l_at_1", m.rouge_l},
              {"bleu_at_1", m.bleu}};
}

}  // namespace

bool consistent(const VisSpec& a, const VisSpec& b, bool strict_filter_order) {
  if (!same_rest(a, b, strict_filter_order)) return false;
  if (same_field(a.x, b.x) && same_field(a.y, b.y)) return true;
  return a.mark == Mark::scatter && same_field(a.x, b.y) && same_field(a.y, b.x);
}

EvalReport evaluate_run(const std::vector<EvalTriplet>& triplets, const std::vector<PredictionSet>& predictions,
                        const EvalOptions& options) {
  std::unordered_map<std::string, const PredictionSet*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, &p).second) throw Error(ErrorCode::AlignmentError, "duplicate prediction id '" + p.id + "'");
  }
  std::unordered_map<std::string, bool> seen;
  for (const auto& t : triplets) {
    if (!seen.emplace(t.id, true).second) throw Error(ErrorCode::AlignmentError, "duplicate triplet id '" + t.id + "'");
    if (!by_id.count(t.id)) throw Error(ErrorCode::AlignmentError, "no predictions for triplet '" + t.id + "'");
    if (!t.table) throw Error(ErrorCode::InvalidArgument, "triplet '" + t.id + "' has no table");
  }
  for (const auto& p : predictions) {
    if (!seen.count(p.id)) throw Error(ErrorCode::AlignmentError, "predictions for unknown triplet '" + p.id + "'");
  }

  EvalReport report;
  report.strict_filter_order = options.strict_filter_order;
  report.examples.resize(triplets.size());

  size_t workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<size_t>(1, triplets.size()));
  std::vector<std::future<void>> jobs;
  for (size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (size_t i = w; i < triplets.size(); i += workers) {
        report.examples[i] = score_one(triplets[i], by_id.at(triplets[i].id), options.strict_filter_order);
      }
    }));
  }
  for (auto& j : jobs) j.get();

  for (const auto& e : report.examples) {
    accumulate(report.overall, e);
    auto it = std::find_if(report.by_hardness.begin(), report.by_hardness.end(),
                           [&](const auto& kv) { return kv.first == e.hardness; });
    if (it == report.by_hardness.end()) {
      report.by_hardness.emplace_back(e.hardness, MetricMeans{});
      it = std::prev(report.by_hardness.end());
    }
    accumulate(it->second, e);
  }
  finish(report.overall);
  for (auto& [_, m] : report.by_hardness) finish(m);
  return report;
}

Json report_to_json(const EvalReport& report) {
  Json hard = Json::object();
  for (const auto& [name, m] : report.by_hardness) hard[name] = means_json(m);
  Json examples = Json::array();
  for (const auto& e : report.examples) {
    examples.push_back({{"id", e.id},
                        {"hardness", e.hardness},
                        {"valid", e.valid},
                        {"consistent_at_1", e.consistent_at_1},
                        {"consistent_at_3", e.consistent_at_3},
                        {"rouge_l_at_1", e.rouge_l},
                        {"bleu_at_1", e.bleu}});
  }
  return Json{{"metric_config", metric_config()},
              {"strict_filter_order", report.strict_filter_order},
              {"n_examples", report.examples.size()},
              {"aggregate", means_json(report.overall)},
              {"by_hardness", std::move(hard)},
              {"examples", std::move(examples)}};
}

std::string format_report_table(const EvalReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %6s %7s %7s %7s %7s %7s\n", "hardness", "n", "valid", "cons@1",
                "cons@3", "rougeL", "bleu");
  out += line;
  auto row = [&](const std::string& name, const MetricMeans& m) {
    std::snprintf(line, sizeof line, "%-12s %6zu %7.4f %7.4f %7.4f %7.4f %7.4f\n", name.c_str(), m.n, m.valid,
                  m.consistent_at_1, m.consistent_at_3, m.rouge_l, m.bleu);
    out += line;
  };
  for (const auto& [name, m] : report.by_hardness) row(name, m);
  row("all", report.overall);
  return out;
}

}  // namespace chartpipe
