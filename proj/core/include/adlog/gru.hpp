#pragma once

#include "adlog/model.hpp"

namespace adlog {

struct GruWeights {
  const Matrix& w;  // 3H x input
  const Matrix& u;  // 3H x H
  const Vector& b;  // 3H
};

// Saved activations of one cell evaluation.
struct GruCache {
  Vector h_prev;
  Vector z;   // update gate
  Vector r;   // reset gate
  Vector n;   // candidate
  Vector rh;  // r * h_prev
};

// h = (1 - z) * h_prev + z * n, with
//   z = sigmoid(a_z + U_z h_prev), r = sigmoid(a_r + U_r h_prev),
//   n = tanh(a_n + U_n (r * h_prev)),
// where a = W x + b is the precomputed input projection.
Vector gru_forward(const Vector& input_proj, const Vector& h_prev, const Matrix& u,
                   GruCache* cache = nullptr);

// Checked single-cell evaluation; throws ModelError on mismatched
// dimensions or non-finite inputs.
Vector gru_cell(const Vector& x, const Vector& h_prev, const GruWeights& weights);

struct GruGradients {
  Vector d_input_proj;
  Vector d_h_prev;
};

// Accumulates dL/dU into `d_u`.
GruGradients gru_backward(const Vector& d_h, const GruCache& cache, const Matrix& u,
                          Matrix& d_u);

}  // namespace adlog
