#include "adlog/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "adlog/error.hpp"

namespace adlog {

double bleu1(std::span<const TokenId> predicted, std::span<const TokenId> reference,
             const BleuOptions& options) {
  if (reference.empty()) throw Error("bleu1: empty reference");
  if (predicted.empty()) return 0.0;
  std::unordered_map<TokenId, std::size_t> ref_counts;
  for (TokenId t : reference) ++ref_counts[t];
  std::unordered_map<TokenId, std::size_t> pred_counts;
  for (TokenId t : predicted) ++pred_counts[t];

  std::size_t clipped = 0;
  for (auto [tok, n] : pred_counts) {
    auto it = ref_counts.find(tok);
    if (it != ref_counts.end()) clipped += std::min(n, it->second);
  }
  const double pred_len = static_cast<double>(predicted.size());
  const double ref_len = static_cast<double>(reference.size());
  const double precision = static_cast<double>(clipped) / pred_len;
  double bp = 1.0;
  if (options.brevity_penalty && pred_len < ref_len) bp = std::exp(1.0 - ref_len / pred_len);
  return 100.0 * precision * bp;
}

double mean_score(std::span<const double> scores) {
  if (scores.empty()) throw Error("accuracy over an empty test set");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

}  // namespace adlog
