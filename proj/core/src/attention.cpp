#include "adlog/attention.hpp"

#include "adlog/error.hpp"

namespace adlog {

Vector softmax(const Vector& logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp().matrix();
  return p / p.sum();
}

AttentionResult attention(const Vector& s_prev, const Matrix& encoder_outputs,
                          const ModelParams& params) {
  if (encoder_outputs.rows() == 0) throw ModelError("attention over an empty sequence");
  const auto h = static_cast<Eigen::Index>(params.hidden_size());
  if (encoder_outputs.cols() != h || s_prev.size() != h) {
    throw ModelError("attention: dimension mismatch");
  }
  detail::AttentionCache cache;
  detail::attend(s_prev, encoder_outputs, detail::attention_keys(encoder_outputs, params), params,
                 cache);
  return {std::move(cache.alphas), std::move(cache.context)};
}

namespace detail {

Matrix attention_keys(const Matrix& encoder_outputs, const ModelParams& params) {
  return encoder_outputs * params.att_u.transpose();
}

void attend(const Vector& s_prev, const Matrix& encoder_outputs, const Matrix& keys,
            const ModelParams& params, AttentionCache& cache) {
  Eigen::RowVectorXd query = (params.att_w * s_prev).transpose();
  cache.s_prev = s_prev;
  cache.energy = (keys.rowwise() + query).array().tanh().matrix();
  cache.alphas = softmax(cache.energy * params.att_v);
  cache.context = encoder_outputs.transpose() * cache.alphas;
}

void attention_backward(const Vector& d_context, const AttentionCache& c,
                        const Matrix& encoder_outputs, const ModelParams& params,
                        ModelParams& grads, Matrix& d_keys, Matrix& d_encoder_outputs,
                        Vector& d_s_prev) {
  // context = E^T alpha
  d_encoder_outputs.noalias() += c.alphas * d_context.transpose();
  Vector d_alpha = encoder_outputs * d_context;
  // softmax Jacobian
  Vector d_score = c.alphas.cwiseProduct((d_alpha.array() - c.alphas.dot(d_alpha)).matrix());
  grads.att_v.noalias() += c.energy.transpose() * d_score;
  Matrix d_pre = (d_score * params.att_v.transpose()).cwiseProduct(
      (1.0 - c.energy.array().square()).matrix());
  d_keys += d_pre;
  Vector d_query = d_pre.colwise().sum().transpose();
  grads.att_w.noalias() += d_query * c.s_prev.transpose();
  d_s_prev.noalias() += params.att_w.transpose() * d_query;
}

}  // namespace detail
}  // namespace adlog
