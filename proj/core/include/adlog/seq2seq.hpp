#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adlog/model.hpp"
#include "adlog/types.hpp"

namespace adlog {

struct Encoding {
  Matrix outputs;  // |x| x H, one hidden state per input element
  Vector final_hidden;
};

// Throws ModelError for an empty sequence or an out-of-range token.
Encoding encode(const ModelParams& params, std::span<const TokenId> sequence);

struct DecodeResult {
  Vector state;  // s_p
  Vector probs;  // distribution over the vocabulary
  Vector alphas;
};

DecodeResult decode_step(const ModelParams& params, TokenId y_prev, const Vector& s_prev,
                         const Matrix& encoder_outputs);

inline constexpr double kProbabilityFloor = 1e-12;

// -log P[target], with P[target] clamped below at kProbabilityFloor.
double nll_loss(const Vector& probs, TokenId target);

enum class Feeding {
  kTeacherForced,  // decoder input at step p is the ground-truth y_{p-1}
  kFreeRunning,    // decoder input is its own argmax; stops after predicting EOS
};

// Mean per-step NLL of decoding `target` followed by EOS.
double sequence_loss(const ModelParams& params, std::span<const TokenId> input,
                     std::span<const TokenId> target, Feeding feeding);

// Same loss; writes dLoss/dParams into `grads` (overwritten, shapes reset)
// and the number of decoder steps taken into `steps` when given.
double loss_and_gradient(const ModelParams& params, std::span<const TokenId> input,
                         std::span<const TokenId> target, Feeding feeding, ModelParams& grads,
                         std::size_t* steps = nullptr);

struct Prediction {
  std::vector<TokenId> tokens;         // without the terminating EOS
  std::vector<Vector> distributions;   // one per decoding step (including EOS step)
};

// Greedy argmax decoding from SOS until EOS or max_len tokens.
Prediction predict(const ModelParams& params, std::span<const TokenId> input,
                   std::size_t max_len);

}  // namespace adlog
