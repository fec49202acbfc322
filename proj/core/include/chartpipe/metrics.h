#pragma once

#include <string>
#include <vector>

#include "chartpipe/json.h"

namespace chartpipe {

using TokenSeq = std::vector<std::string>;

/// Sequences compared by the metrics must have exactly this many tokens.
inline constexpr size_t kSequenceLength = 8;

size_t lcs_length(const TokenSeq& a, const TokenSeq& b);

/// LCS / 8. Throws LengthMismatch unless both sequences have 8 tokens.
double rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

/// Sentence BLEU against a single reference: clipped n-gram precisions for
/// n = 1..4, uniform weights, add-one smoothing for n >= 2 only, brevity
/// penalty 1. With no unigram match the score is 0. Throws LengthMismatch.
double bleu(const TokenSeq& candidate, const TokenSeq& reference);

/// Machine-readable description of the metric settings above.
Json metric_config();

}  // namespace chartpipe
