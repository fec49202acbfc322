#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chartpipe {

enum class ErrorCode {
  // tabular
  EmptyInput,
  RaggedRow,
  DuplicateColumn,
  // dsl / filter
  SyntaxError,
  UnknownColumn,
  UnknownKeyword,
  TypeMismatch,
  // backend
  BackendUnavailable,
  PromptTooLong,
  MalformedResponse,
  ScriptMiss,
  // pipeline / compiler
  NoValidChart,
  InvalidEditedAnswer,
  InvalidCombination,
  // evaluation
  LengthMismatch,
  AlignmentError,
  // generic
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// that callers (CLI, HTTP service) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace chartpipe
