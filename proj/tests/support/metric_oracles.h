#pragma once
// Independent metric oracles.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "chartpipe/metrics.h"

namespace chartpipe::testing {

// Longest common subsequence by enumerating every subsequence of `a`.
inline size_t lcs_by_enumeration(const TokenSeq& a, const TokenSeq& b) {
  size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    size_t j = 0;
    size_t taken = 0;
    bool ok = true;
    for (size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else {
        ++j;
        ++taken;
      }
    }
    if (ok) best = std::max(best, taken);
  }
  return best;
}

// Straight product of modified precisions, n-grams keyed by joined text.
inline double reference_bleu(const TokenSeq& cand, const TokenSeq& ref) {
  auto grams = [](const TokenSeq& s, size_t n) {
    std::map<std::string, int> m;
    for (size_t i = 0; i + n <= s.size(); ++i) {
      std::string key;
      for (size_t k = i; k < i + n; ++k) key += s[k] + '\x1f';
      m[key] += 1;
    }
    return m;
  };
  double product = 1.0;
  for (size_t n = 1; n <= 4; ++n) {
    const auto c = grams(cand, n);
    const auto r = grams(ref, n);
    double hit = 0;
    double all = 0;
    for (const auto& [k, v] : c) {
      all += v;
      const auto it = r.find(k);
      hit += it == r.end() ? 0 : std::min(v, it->second);
    }
    if (n == 1 && hit == 0) return 0.0;
    product *= n == 1 ? hit / all : (hit + 1) / (all + 1);
  }
  return std::pow(product, 0.25);
}

}  // namespace chartpipe::testing
