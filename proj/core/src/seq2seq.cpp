#include "adlog/seq2seq.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "adlog/attention.hpp"
#include "adlog/error.hpp"
#include "adlog/gru.hpp"
#include "adlog/vocabulary.hpp"

namespace adlog {
namespace {

void check_tokens(const ModelParams& params, std::span<const TokenId> tokens, const char* what) {
  for (TokenId t : tokens) {
    if (t >= params.vocab_size()) {
      throw ModelError(fmt::format("{} token {} outside vocabulary of {}", what, t,
                                   params.vocab_size()));
    }
  }
}

struct EncoderTrace {
  Matrix outputs;
  std::vector<GruCache> cells;
};

EncoderTrace run_encoder(const ModelParams& p, std::span<const TokenId> input, bool keep) {
  const auto h = static_cast<Eigen::Index>(p.hidden_size());
  EncoderTrace tr;
  tr.outputs.resize(static_cast<Eigen::Index>(input.size()), h);
  if (keep) tr.cells.resize(input.size());
  Vector state = Vector::Zero(h);
  for (std::size_t t = 0; t < input.size(); ++t) {
    Vector proj = p.enc_w * p.embedding.row(input[t]).transpose() + p.enc_b;
    state = gru_forward(proj, state, p.enc_u, keep ? &tr.cells[t] : nullptr);
    tr.outputs.row(static_cast<Eigen::Index>(t)) = state.transpose();
  }
  return tr;
}

struct DecoderStep {
  TokenId input = kSos;
  TokenId target = kEos;
  detail::AttentionCache att;
  GruCache cell;
  Vector state;
  Vector probs;
};

Vector step_forward(const ModelParams& p, TokenId y_prev, const Vector& s_prev,
                    const Matrix& enc_outputs, const Matrix& keys, DecoderStep& step) {
  detail::attend(s_prev, enc_outputs, keys, p, step.att);
  Vector proj = p.dec_wy * p.embedding.row(y_prev).transpose() + p.dec_wc * step.att.context +
                p.dec_b;
  step.input = y_prev;
  step.state = gru_forward(proj, s_prev, p.dec_u, &step.cell);
  step.probs = softmax(p.out_w * step.state + p.out_b);
  return step.state;
}

TokenId argmax(const Vector& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<TokenId>(best);
}

double run(const ModelParams& p, std::span<const TokenId> input, std::span<const TokenId> target,
           Feeding feeding, ModelParams* grads, std::size_t* n_taken = nullptr) {
  if (input.empty()) throw ModelError("cannot encode an empty sequence");
  check_tokens(p, input, "input");
  check_tokens(p, target, "target");

  EncoderTrace enc = run_encoder(p, input, grads != nullptr);
  const Matrix keys = detail::attention_keys(enc.outputs, p);

  std::vector<DecoderStep> steps;
  steps.reserve(target.size() + 1);
  Vector state = enc.outputs.bottomRows(1).transpose();
  TokenId y_prev = kSos;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i <= target.size(); ++i) {
    const TokenId want = i < target.size() ? target[i] : kEos;
    DecoderStep& step = steps.emplace_back();
    state = step_forward(p, y_prev, state, enc.outputs, keys, step);
    step.target = want;
    loss_sum += nll_loss(step.probs, want);
    if (feeding == Feeding::kTeacherForced) {
      y_prev = want;
    } else {
      y_prev = argmax(step.probs);
      if (y_prev == kEos) break;
    }
  }
  const double n_steps = static_cast<double>(steps.size());
  const double loss = loss_sum / n_steps;
  if (n_taken) *n_taken = steps.size();
  if (!grads) return loss;

  ModelParams& g = *grads;
  g = zero_params(p.vocab_size(), p.hidden_size());
  const auto h = static_cast<Eigen::Index>(p.hidden_size());
  Matrix d_keys = Matrix::Zero(enc.outputs.rows(), h);
  Matrix d_enc = Matrix::Zero(enc.outputs.rows(), h);
  Vector d_state = Vector::Zero(h);

  for (std::size_t i = steps.size(); i-- > 0;) {
    const DecoderStep& step = steps[i];
    Vector d_logits = step.probs;
    // Matches nll_loss: below the floor the loss is constant.
    if (step.probs[step.target] >= kProbabilityFloor) d_logits[step.target] -= 1.0;
    else d_logits.setZero();
    d_logits /= n_steps;

    g.out_w.noalias() += d_logits * step.state.transpose();
    g.out_b += d_logits;
    d_state.noalias() += p.out_w.transpose() * d_logits;

    GruGradients cg = gru_backward(d_state, step.cell, p.dec_u, g.dec_u);
    g.dec_b += cg.d_input_proj;
    g.dec_wy.noalias() += cg.d_input_proj * p.embedding.row(step.input);
    g.dec_wc.noalias() += cg.d_input_proj * step.att.context.transpose();
    g.embedding.row(step.input).noalias() += (p.dec_wy.transpose() * cg.d_input_proj).transpose();
    Vector d_context = p.dec_wc.transpose() * cg.d_input_proj;

    d_state = std::move(cg.d_h_prev);
    detail::attention_backward(d_context, step.att, enc.outputs, p, g, d_keys, d_enc, d_state);
  }

  // keys = E * att_u^T
  g.att_u.noalias() += d_keys.transpose() * enc.outputs;
  d_enc.noalias() += d_keys * p.att_u;
  // The decoder starts from the encoder's final hidden state.
  d_enc.bottomRows(1) += d_state.transpose();

  Vector d_h = Vector::Zero(h);
  for (std::size_t t = input.size(); t-- > 0;) {
    d_h += d_enc.row(static_cast<Eigen::Index>(t)).transpose();
    GruGradients cg = gru_backward(d_h, enc.cells[t], p.enc_u, g.enc_u);
    g.enc_b += cg.d_input_proj;
    g.enc_w.noalias() += cg.d_input_proj * p.embedding.row(input[t]);
    g.embedding.row(input[t]).noalias() += (p.enc_w.transpose() * cg.d_input_proj).transpose();
    d_h = std::move(cg.d_h_prev);
  }
  return loss;
}

}  // namespace

Encoding encode(const ModelParams& params, std::span<const TokenId> sequence) {
  if (sequence.empty()) throw ModelError("cannot encode an empty sequence");
  check_tokens(params, sequence, "input");
  EncoderTrace tr = run_encoder(params, sequence, false);
  Encoding e;
  e.final_hidden = tr.outputs.bottomRows(1).transpose();
  e.outputs = std::move(tr.outputs);
  return e;
}

DecodeResult decode_step(const ModelParams& params, TokenId y_prev, const Vector& s_prev,
                         const Matrix& encoder_outputs) {
  if (y_prev >= params.vocab_size()) {
    throw ModelError(fmt::format("decoder input token {} outside vocabulary", y_prev));
  }
  if (encoder_outputs.rows() == 0) throw ModelError("attention over an empty sequence");
  DecoderStep step;
  step_forward(params, y_prev, s_prev, encoder_outputs,
               detail::attention_keys(encoder_outputs, params), step);
  return {std::move(step.state), std::move(step.probs), std::move(step.att.alphas)};
}

double nll_loss(const Vector& probs, TokenId target) {
  if (target >= probs.size()) throw ModelError("nll_loss: target outside distribution");
  return -std::log(std::max(probs[target], kProbabilityFloor));
}

double sequence_loss(const ModelParams& params, std::span<const TokenId> input,
                     std::span<const TokenId> target, Feeding feeding) {
  return run(params, input, target, feeding, nullptr);
}

double loss_and_gradient(const ModelParams& params, std::span<const TokenId> input,
                         std::span<const TokenId> target, Feeding feeding, ModelParams& grads,
                         std::size_t* steps) {
  return run(params, input, target, feeding, &grads, steps);
}

Prediction predict(const ModelParams& params, std::span<const TokenId> input,
                   std::size_t max_len) {
  if (params.vocab_size() <= kReservedTokens) throw ModelError("model vocabulary is empty");
  Encoding enc = encode(params, input);
  const Matrix keys = detail::attention_keys(enc.outputs, params);
  Prediction out;
  Vector state = enc.final_hidden;
  TokenId y_prev = kSos;
  DecoderStep step;
  while (out.tokens.size() < max_len) {
    state = step_forward(params, y_prev, state, enc.outputs, keys, step);
    y_prev = argmax(step.probs);
    out.distributions.push_back(step.probs);
    if (y_prev == kEos) break;
    out.tokens.push_back(y_prev);
  }
  return out;
}

}  // namespace adlog
