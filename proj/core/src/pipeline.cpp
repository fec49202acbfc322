#include "chartpipe/pipeline.h"

#include <algorithm>
#include <future>

#include "chartpipe/dataset.h"
#include "chartpipe/errors.h"
#include "chartpipe/eval.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

StepAnswer none_answer(StepIndex step) {
  switch (step) {
    case StepIndex::filter_rows: return FilterAnswer{std::nullopt, "none"};
    case StepIndex::add_aggregations: return AggregationsAnswer{};
    case StepIndex::add_sort: return SortAnswer{};
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "step " + std::to_string(step_number(step)) + " has no none answer");
}

void check_step_answer(const std::vector<StepAnswer>& prior, const StepAnswer& answer, const DataTable& table) {
  validate_step_answer(answer, table);
  check_chain_consistency(prior, answer, table);
  if (step_of(answer) == StepIndex::add_sort) {
    std::vector<StepAnswer> full = prior;
    full.push_back(answer);
    validate_spec(assemble_spec(full), table);
  }
}

std::vector<ChartResult> finish_chains(const std::vector<Chain>& chains, const DataTable& table,
                                       const GenerationConfig& config) {
  std::vector<ChartResult> out;
  for (const auto& chain : chains) {
    ChartResult r;
    try {
      r = make_result(chain.answers, chain.logprob, table, config.compile);
    } catch (const Error&) {
      continue;
    }
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const ChartResult& kept) {
      return consistent(kept.spec, r.spec);
    });
    if (duplicate) continue;
    out.push_back(std::move(r));
    if (out.size() == config.k) break;
  }
  if (out.empty()) throw Error(ErrorCode::NoValidChart, "no finished chain compiles to a chart");
  for (size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

std::vector<ChartResult> run_beam(const DataTable& table, std::string_view utterance, std::vector<Chain> beam,
                                  int first_step, const GenerationConfig& config,
                                  const CompletionBackend& backend) {
  for (int n = first_step; n <= 6; ++n) {
    const StepIndex step = step_from_number(n);
    std::vector<std::future<std::vector<ScoredText>>> calls;
    calls.reserve(beam.size());
    for (const auto& chain : beam) {
      CompletionRequest req{assemble_prompt(table, utterance, chain.answers, step, config.prompts),
                            config.beam_width, config.max_new_tokens};
      calls.push_back(std::async(beam.size() > 1 ? std::launch::async : std::launch::deferred,
                                 [&backend, req = std::move(req)] { return backend.complete(req); }));
    }
    std::vector<std::vector<ScoredText>> responses;
    responses.reserve(calls.size());
    for (auto& c : calls) c.wait();
    for (auto& c : calls) responses.push_back(c.get());

    std::vector<Chain> next;
    for (size_t i = 0; i < beam.size(); ++i) {
      auto survivors = prune_invalid(responses[i], step, table, beam[i]);
      if (survivors.empty() && step_is_optional(step)) {
        const double best = responses[i].empty() ? 0.0 : responses[i].front().logprob;
        survivors.push_back({none_answer(step), best - config.none_penalty});
      }
      for (auto& s : survivors) {
        Chain c = beam[i];
        c.answers.push_back(std::move(s.answer));
        c.logprob += s.logprob;
        next.push_back(std::move(c));
      }
    }
    if (next.empty()) {
      throw Error(ErrorCode::NoValidChart,
                  "every candidate was pruned at step " + std::to_string(n) + " (" + std::string(step_name(step)) + ")");
    }
    std::stable_sort(next.begin(), next.end(), [](const Chain& a, const Chain& b) { return a.logprob > b.logprob; });
    if (next.size() > config.beam_width) next.resize(config.beam_width);
    beam = std::move(next);
  }
  return finish_chains(beam, table, config);
}

}  // namespace

void GenerationConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (beam_width == 0) throw Error(ErrorCode::InvalidArgument, "beam_width must be at least 1");
  if (max_new_tokens == 0) throw Error(ErrorCode::InvalidArgument, "max_new_tokens must be at least 1");
}

std::vector<ScoredAnswer> prune_invalid(const std::vector<ScoredText>& candidates, StepIndex step,
                                        const DataTable& table, const Chain& prior) {
  std::vector<ScoredAnswer> out;
  for (const auto& c : candidates) {
    StepAnswer answer;
    try {
      answer = parse_step_answer(step, c.text, table);
      check_step_answer(prior.answers, answer, table);
    } catch (const Error&) {
      continue;
    }
    const bool repeat =
        std::any_of(out.begin(), out.end(), [&](const ScoredAnswer& s) { return s.answer == answer; });
    if (!repeat) out.push_back({std::move(answer), c.logprob});
  }
  return out;
}

std::vector<ChartResult> generate_topk(const DataTable& table, std::string_view utterance,
                                       const GenerationConfig& config, const CompletionBackend& backend) {
  config.validate();
  if (text::trim(utterance).empty()) throw Error(ErrorCode::InvalidArgument, "utterance is empty");
  return run_beam(table, utterance, {Chain{}}, 1, config, backend);
}

std::optional<PinProblem> check_pinned(const std::vector<StepAnswer>& fixed, const DataTable& table) {
  std::vector<StepAnswer> prefix;
  for (size_t i = 0; i < fixed.size() && i < 6; ++i) {
    const int step = static_cast<int>(i) + 1;
    if (step_number(step_of(fixed[i])) != step) {
      return PinProblem{step, "expected an answer for step " + std::to_string(step) + ", got one for step " +
                                  std::to_string(step_number(step_of(fixed[i])))};
    }
    try {
      check_step_answer(prefix, fixed[i], table);
    } catch (const Error& e) {
      return PinProblem{step, e.what()};
    }
    prefix.push_back(fixed[i]);
  }
  return std::nullopt;
}

std::vector<ChartResult> regenerate_from_step(const DataTable& table, std::string_view utterance,
                                              const std::vector<StepAnswer>& fixed,
                                              const GenerationConfig& config, const CompletionBackend& backend) {
  config.validate();
  if (fixed.empty() || fixed.size() > 6) {
    throw Error(ErrorCode::InvalidEditedAnswer, "pin between one and six step answers");
  }
  if (auto problem = check_pinned(fixed, table)) {
    throw Error(ErrorCode::InvalidEditedAnswer, "step " + std::to_string(problem->step) + " (" +
                                                    std::string(step_name(step_from_number(problem->step))) +
                                                    "): " + problem->message);
  }
  std::vector<StepAnswer> prefix = fixed;
  if (prefix.size() == 6) {
    auto r = make_result(prefix, 0.0, table, config.compile);
    r.rank = 1;
    return {std::move(r)};
  }
  if (text::trim(utterance).empty()) throw Error(ErrorCode::InvalidArgument, "utterance is empty");
  const int resume = static_cast<int>(prefix.size()) + 1;
  return run_beam(table, utterance, {Chain{std::move(prefix), 0.0}}, resume, config, backend);
}

std::vector<StepAnswer> apply_step_edits(const std::vector<StepAnswer>& base, int from_step,
                                         const std::map<int, std::string>& edits, const DataTable& table) {
  if (from_step < 1 || from_step > 6) {
    throw Error(ErrorCode::InvalidEditedAnswer, "from_step must be 1-6, got " + std::to_string(from_step));
  }
  if (base.size() < static_cast<size_t>(from_step)) {
    throw Error(ErrorCode::InvalidEditedAnswer, "the result has only " + std::to_string(base.size()) + " answers");
  }
  std::vector<StepAnswer> out(base.begin(), base.begin() + from_step);
  for (const auto& [step, text] : edits) {
    if (step < 1 || step > from_step) {
      throw Error(ErrorCode::InvalidEditedAnswer, "edit to step " + std::to_string(step) +
                                                      " lies outside the pinned steps 1-" + std::to_string(from_step));
    }
    try {
      out[step - 1] = parse_step_answer(step_from_number(step), text, table);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidEditedAnswer, "step " + std::to_string(step) + " (" +
                                                      std::string(step_name(step_from_number(step))) +
                                                      "): " + e.what());
    }
  }
  return out;
}

ChartResult make_result(const std::vector<StepAnswer>& answers, double score, const DataTable& table,
                        const CompileOptions& options) {
  ChartResult r;
  r.spec = assemble_spec(answers);
  r.vegalite = compile_vegalite(r.spec, table, options);
  r.chart_type = resolve_chart_type(r.spec, table);
  r.score = score;
  r.answers = answers;
  return r;
}

Json result_to_json(const ChartResult& result) {
  Json steps = Json::array();
  for (const auto& a : result.answers) {
    const StepIndex s = step_of(a);
    steps.push_back({{"step", step_number(s)}, {"name", std::string(step_name(s))}, {"answer", serialize_step_answer(a)}});
  }
  return Json{{"rank", result.rank},
              {"chart_type", std::string(to_string(result.chart_type))},
              {"score", result.score},
              {"steps", std::move(steps)},
              {"spec", spec_to_slots(result.spec)},
              {"vegalite", result.vegalite}};
}

}  // namespace chartpipe
