#include "chartpipe/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "chartpipe/errors.h"

namespace chartpipe {

namespace {

constexpr int kMaxOrder = 4;

void check_lengths(const TokenSeq& a, const TokenSeq& b) {
  if (a.size() != kSequenceLength || b.size() != kSequenceLength) {
    throw Error(ErrorCode::LengthMismatch, "metric sequences need 8 tokens, got " + std::to_string(a.size()) +
                                               " and " + std::to_string(b.size()));
  }
}

std::map<TokenSeq, int> ngram_counts(const TokenSeq& s, size_t n) {
  std::map<TokenSeq, int> counts;
  for (size_t i = 0; i + n <= s.size(); ++i) ++counts[TokenSeq(s.begin() + i, s.begin() + i + n)];
  return counts;
}

}  // namespace

size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  check_lengths(candidate, reference);
  return static_cast<double>(lcs_length(candidate, reference)) / kSequenceLength;
}

double bleu(const TokenSeq& candidate, const TokenSeq& reference) {
  check_lengths(candidate, reference);
  double log_sum = 0.0;
  for (int n = 1; n <= kMaxOrder; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    int matched = 0;
    int total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    double p;
    if (n == 1) {
      if (matched == 0) return 0.0;
      p = static_cast<double>(matched) / total;
    } else {
      p = (matched + 1.0) / (total + 1.0);
    }
    log_sum += std::log(p) / kMaxOrder;
  }
  return std::exp(log_sum);
}

Json metric_config() {
  return Json{{"sequence_length", kSequenceLength},
              {"rouge_l", "lcs / sequence_length"},
              {"bleu", Json{{"max_order", kMaxOrder},
                            {"weights", "uniform"},
                            {"smoothing", "add-one for n >= 2"},
                            {"brevity_penalty", 1}}}};
}

}  // namespace chartpipe
