#pragma once

#include "adlog/model.hpp"

namespace adlog {

struct AttentionResult {
  Vector alphas;   // |x| weights, non-negative, summing to 1
  Vector context;  // sum_t alphas[t] * h_t
};

// Additive attention of decoder state `s_prev` over the rows of
// `encoder_outputs` (|x| x H). Throws ModelError when |x| == 0.
AttentionResult attention(const Vector& s_prev, const Matrix& encoder_outputs,
                          const ModelParams& params);

// Numerically stable softmax.
Vector softmax(const Vector& logits);

namespace detail {

struct AttentionCache {
  Vector s_prev;
  Matrix energy;  // tanh(att_w s_prev + att_u h_t), one row per t
  Vector alphas;
  Vector context;
};

// keys = encoder_outputs * att_u^T, shared across decoder steps.
Matrix attention_keys(const Matrix& encoder_outputs, const ModelParams& params);

void attend(const Vector& s_prev, const Matrix& encoder_outputs, const Matrix& keys,
            const ModelParams& params, AttentionCache& cache);

// Accumulates into grads.att_w / grads.att_v, d_keys and d_encoder_outputs;
// adds the state gradient to d_s_prev.
void attention_backward(const Vector& d_context, const AttentionCache& cache,
                        const Matrix& encoder_outputs, const ModelParams& params,
                        ModelParams& grads, Matrix& d_keys, Matrix& d_encoder_outputs,
                        Vector& d_s_prev);

}  // namespace detail
}  // namespace adlog
