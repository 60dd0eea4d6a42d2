#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace adlog {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Every weight of the attention encoder-decoder. Gate blocks inside the
// 3H-row GRU tensors are ordered [update z; reset r; candidate n].
//
//   encoder:   h_t = GRU(enc_w * emb(x_t) + enc_b, h_{t-1}; enc_u)
//   attention: score_t = att_v . tanh(att_w * s_{p-1} + att_u * h_t)
//   decoder:   s_p = GRU(dec_wy * emb(y_{p-1}) + dec_wc * c_p + dec_b, s_{p-1}; dec_u)
//   output:    P_p = softmax(out_w * s_p + out_b)
struct ModelParams {
  Matrix embedding;  // V x H
  Matrix enc_w;      // 3H x H
  Matrix enc_u;      // 3H x H
  Vector enc_b;      // 3H
  Matrix att_w;      // H x H, decoder state
  Matrix att_u;      // H x H, encoder hidden
  Vector att_v;      // H
  Matrix dec_wy;     // 3H x H, previous token
  Matrix dec_wc;     // 3H x H, context vector
  Matrix dec_u;      // 3H x H
  Vector dec_b;      // 3H
  Matrix out_w;      // V x H
  Vector out_b;      // V

  std::size_t hidden_size() const { return static_cast<std::size_t>(att_v.size()); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(out_b.size()); }

  // Calls f(name, tensor) for each tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    f("embedding", embedding);
    f("enc_w", enc_w);
    f("enc_u", enc_u);
    f("enc_b", enc_b);
    f("att_w", att_w);
    f("att_u", att_u);
    f("att_v", att_v);
    f("dec_wy", dec_wy);
    f("dec_wc", dec_wc);
    f("dec_u", dec_u);
    f("dec_b", dec_b);
    f("out_w", out_w);
    f("out_b", out_b);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit(
        [&](std::string_view name, const auto& t) { f(name, t); });
  }

  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

inline constexpr std::size_t kTensorCount = 13;

// Read-only view of one tensor's storage (column-major, Eigen default).
struct TensorView {
  std::string_view name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  const double* data = nullptr;

  std::size_t size() const { return rows * cols; }
};

std::array<TensorView, kTensorCount> tensor_views(const ModelParams& p);

// Zero tensors of the right shape (also the gradient accumulator layout).
ModelParams zero_params(std::size_t vocab_size, std::size_t hidden_size);

// Uniform in [-1/sqrt(H), 1/sqrt(H)].
ModelParams init_params(std::size_t vocab_size, std::size_t hidden_size, std::uint64_t seed);

// Throws ModelError if tensor shapes disagree with each other.
void check_shapes(const ModelParams& p);

double squared_norm(const ModelParams& p);

// a += scale * b
void axpy(ModelParams& a, double scale, const ModelParams& b);

}  // namespace adlog
