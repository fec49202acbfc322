#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chartpipe/dsl.h"
#include "chartpipe/table.h"

namespace chartpipe {

/// Per-step task instructions. `version` is printed into every prompt so a
/// transcript records which wording produced it.
struct PromptTemplates {
  std::string version = "1";
  std::array<std::string, 6> instructions;

  static PromptTemplates defaults();
  const std::string& instruction(StepIndex step) const { return instructions[step_number(step) - 1]; }
};

/// Layout:
///
///   ### task
///   step 3 of 6: add aggregations (prompt v1)
///   <instruction>
///   ### table
///   <prompt_snippet>
///   ### utterance
///   <utterance>
///   ### previous answers        (omitted at step 1)
///   select columns: ...
///   ### answer
///
/// `prior` must hold the answers of steps 1..step-1 in order.
std::string assemble_prompt(const DataTable& table, std::string_view utterance,
                            const std::vector<StepAnswer>& prior, StepIndex step,
                            const PromptTemplates& templates = PromptTemplates::defaults());

/// What a backend can recover from a prompt built by assemble_prompt.
struct PromptContext {
  int step = 0;
  std::string utterance;
  std::map<int, std::string> prior;
};

/// Inverse of the layout above. Throws SyntaxError on prompts that do not
/// follow it.
PromptContext decode_prompt(std::string_view prompt);

}  // namespace chartpipe
