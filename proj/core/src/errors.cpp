#include "chartpipe/errors.h"

namespace chartpipe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::DuplicateColumn: return "DuplicateColumn";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::UnknownKeyword: return "UnknownKeyword";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::PromptTooLong: return "PromptTooLong";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ScriptMiss: return "ScriptMiss";
    case ErrorCode::NoValidChart: return "NoValidChart";
    case ErrorCode::InvalidEditedAnswer: return "InvalidEditedAnswer";
    case ErrorCode::InvalidCombination: return "InvalidCombination";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace chartpipe
