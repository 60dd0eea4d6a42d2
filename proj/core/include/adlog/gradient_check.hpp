#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adlog/model.hpp"
#include "adlog/types.hpp"

namespace adlog {

struct GradientCheckOptions {
  double eps = 1e-5;
  // Per tensor; tensors with fewer entries are checked exhaustively.
  std::size_t samples_per_tensor = 100;
  std::uint64_t seed = 0;
};

struct TensorGradientCheck {
  std::string name;
  std::size_t checked = 0;
  double max_relative_error = 0.0;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::vector<TensorGradientCheck> tensors;
};

// |a - n| / max(|a|, |n|); 0 when both are exactly 0.
double relative_error(double analytic, double numeric);

// Compares backpropagated gradients with central differences
// (L(theta + eps) - L(theta - eps)) / (2 eps) under teacher forcing.
GradientCheckResult gradient_check(const ModelParams& params, std::span<const TokenId> input,
                                   std::span<const TokenId> target,
                                   const GradientCheckOptions& options = {});

}  // namespace adlog
