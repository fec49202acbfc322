#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chartpipe/backend.h"
#include "chartpipe/compiler.h"
#include "chartpipe/dsl.h"
#include "chartpipe/json.h"
#include "chartpipe/prompt.h"
#include "chartpipe/table.h"

namespace chartpipe {

struct GenerationConfig {
  size_t k = 3;
  size_t beam_width = 4;
  size_t max_new_tokens = 64;
  /// Subtracted from the best rejected score when an optional step falls
  /// back to `none`.
  double none_penalty = 1.0;
  PromptTemplates prompts = PromptTemplates::defaults();
  CompileOptions compile;

  /// Throws InvalidArgument for k == 0 or beam_width == 0.
  void validate() const;
};

/// Answers for steps 1..n in order, with the summed logprob of the
/// candidates that produced them.
struct Chain {
  std::vector<StepAnswer> answers;
  double logprob = 0.0;
};

struct ScoredAnswer {
  StepAnswer answer;
  double logprob = 0.0;
};

struct ChartResult {
  size_t rank = 0;
  VisSpec spec;
  ChartType chart_type = ChartType::bar;
  Json vegalite;
  double score = 0.0;
  std::vector<StepAnswer> answers;
};

/// Keeps the candidates that parse for `step`, validate against the table
/// and agree with the chain so far. Input order is kept; a candidate whose
/// parsed answer repeats an earlier survivor is dropped.
std::vector<ScoredAnswer> prune_invalid(const std::vector<ScoredText>& candidates, StepIndex step,
                                        const DataTable& table, const Chain& prior);

/// Six-step beam search. Each surviving chain asks the backend for
/// beam_width candidates; survivors of pruning extend the chain and the
/// best beam_width chains (summed logprob, ties keep earlier chains) go on.
/// Finished chains are compiled and collapsed by consistency, best first,
/// and the top k are returned. Throws NoValidChart when nothing survives.
std::vector<ChartResult> generate_topk(const DataTable& table, std::string_view utterance,
                                       const GenerationConfig& config, const CompletionBackend& backend);

struct PinProblem {
  int step = 0;
  std::string message;
};

/// First pinned answer that fails validation or contradicts an earlier pin.
std::optional<PinProblem> check_pinned(const std::vector<StepAnswer>& fixed, const DataTable& table);

/// Resumes the search after `fixed` (answers for steps 1..j, j >= 1). Pinned
/// answers add 0 to the score. Throws InvalidEditedAnswer when a pinned
/// answer fails validation or contradicts an earlier pin.
std::vector<ChartResult> regenerate_from_step(const DataTable& table, std::string_view utterance,
                                              const std::vector<StepAnswer>& fixed,
                                              const GenerationConfig& config, const CompletionBackend& backend);

/// Pinned prefix for regeneration: the first `from_step` answers of `base`
/// with `edits` (step number -> answer text) parsed and substituted. Throws
/// InvalidEditedAnswer for unparsable edits or edits after `from_step`.
std::vector<StepAnswer> apply_step_edits(const std::vector<StepAnswer>& base, int from_step,
                                         const std::map<int, std::string>& edits, const DataTable& table);

/// Compiles a full chain into a rank-less result. Throws like compile_vegalite.
ChartResult make_result(const std::vector<StepAnswer>& answers, double score, const DataTable& table,
                        const CompileOptions& options = {});

/// {"rank", "chart_type", "score", "steps": [{"step", "name", "answer"}], "spec": {8 slots}, "vegalite"}
Json result_to_json(const ChartResult& result);

}  // namespace chartpipe
