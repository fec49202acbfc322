#include "chartpipe/prompt.h"

#include "chartpipe/errors.h"
#include "chartpipe/text.h"

namespace chartpipe {

namespace {

constexpr std::string_view kTask = "### task";
constexpr std::string_view kTable = "### table";
constexpr std::string_view kUtterance = "### utterance";
constexpr std::string_view kPrior = "### previous answers";
constexpr std::string_view kAnswer = "### answer";

std::string one_line(std::string_view s) { return text::normalize_space(s); }

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.instructions = {
      "List the one to three table columns the chart needs, separated by commas.",
      "Give a filter condition such as `Column >= 2000` or `Column = 'text'`, joined with and/or, or none.",
      "Give aggregations as `<count|sum|average|max|min> <column>`, separated by commas, or none.",
      "Choose one mark: bar, pie, line or scatter.",
      "Give the encoding as `x: <field>, y: <field>, color: <column|none>`; aggregated fields read `average(Column)`.",
      "Give the sort as `<x|y> <asc|desc>`, or none.",
  };
  return t;
}

std::string assemble_prompt(const DataTable& table, std::string_view utterance,
                            const std::vector<StepAnswer>& prior, StepIndex step,
                            const PromptTemplates& templates) {
  const int n = step_number(step);
  if (static_cast<int>(prior.size()) != n - 1) {
    throw Error(ErrorCode::InvalidArgument, "step " + std::to_string(n) + " needs " + std::to_string(n - 1) +
                                                " prior answers, got " + std::to_string(prior.size()));
  }
  std::string out;
  out += kTask;
  out += "\nstep " + std::to_string(n) + " of 6: " + std::string(step_name(step)) + " (prompt v" +
         templates.version + ")\n";
  out += templates.instruction(step) + "\n";
  out += kTable;
  out += "\n" + prompt_snippet(table) + "\n";
  out += kUtterance;
  out += "\n" + one_line(utterance) + "\n";
  if (!prior.empty()) {
    out += kPrior;
    out += "\n";
    for (size_t i = 0; i < prior.size(); ++i) {
      if (step_number(step_of(prior[i])) != static_cast<int>(i) + 1) {
        throw Error(ErrorCode::InvalidArgument, "prior answers out of step order");
      }
      out += std::string(step_name(step_of(prior[i]))) + ": " + one_line(serialize_step_answer(prior[i])) + "\n";
    }
  }
  out += kAnswer;
  out += "\n";
  return out;
}

PromptContext decode_prompt(std::string_view prompt) {
  const auto lines = text::split(prompt, '\n');
  PromptContext ctx;
  std::string_view section;
  bool saw_utterance = false;
  for (const auto& raw : lines) {
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.rfind("### ", 0) == 0) {
      section = line == kTask ? kTask
              : line == kTable ? kTable
              : line == kUtterance ? kUtterance
              : line == kPrior ? kPrior
              : line == kAnswer ? kAnswer
              : std::string_view{};
      if (section.empty()) throw Error(ErrorCode::SyntaxError, "unknown prompt section '" + std::string(line) + "'");
      continue;
    }
    if (section == kTask && ctx.step == 0 && line.rfind("step ", 0) == 0) {
      const auto digits = line.substr(5, line.find(' ', 5) - 5);
      const auto n = text::parse_number(digits);
      if (!n || *n < 1 || *n > 6) throw Error(ErrorCode::SyntaxError, "bad step line in prompt");
      ctx.step = static_cast<int>(*n);
    } else if (section == kUtterance && !saw_utterance) {
      ctx.utterance = std::string(line);
      saw_utterance = true;
    } else if (section == kPrior && !line.empty()) {
      bool matched = false;
      for (StepIndex s : kAllSteps) {
        const std::string label = std::string(step_name(s)) + ": ";
        if (line.rfind(label, 0) == 0) {
          ctx.prior[step_number(s)] = std::string(line.substr(label.size()));
          matched = true;
          break;
        }
      }
      if (!matched) throw Error(ErrorCode::SyntaxError, "unlabelled prior answer '" + std::string(line) + "'");
    }
  }
  if (ctx.step == 0 || !saw_utterance) throw Error(ErrorCode::SyntaxError, "prompt lacks a step or an utterance");
  return ctx;
}

}  // namespace chartpipe
