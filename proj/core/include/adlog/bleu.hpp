#pragma once

#include <span>
#include <vector>

#include "adlog/types.hpp"

namespace adlog {

struct BleuOptions {
  bool brevity_penalty = true;
};

// 100 * clipped unigram precision * brevity penalty. The penalty is
// exp(1 - |ref| / |pred|) when the prediction is shorter than the reference.
// An empty prediction scores 0; an empty reference throws.
double bleu1(std::span<const TokenId> predicted, std::span<const TokenId> reference,
             const BleuOptions& options = {});

struct BleuReport {
  std::vector<double> scores;  // per test pair, in [0, 100]
  double mean = 0.0;
};

// Throws on an empty score list.
double mean_score(std::span<const double> scores);

}  // namespace adlog
