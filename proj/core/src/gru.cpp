#include "adlog/gru.hpp"

#include "adlog/error.hpp"

namespace adlog {
namespace {

Vector sigmoid(const Vector& x) {
  return x.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

}  // namespace

Vector gru_forward(const Vector& input_proj, const Vector& h_prev, const Matrix& u,
                   GruCache* cache) {
  const Eigen::Index h = h_prev.size();
  Vector zr = input_proj.head(2 * h) + u.topRows(2 * h) * h_prev;
  Vector z = sigmoid(zr.head(h));
  Vector r = sigmoid(zr.tail(h));
  Vector rh = r.cwiseProduct(h_prev);
  Vector n = (input_proj.tail(h) + u.bottomRows(h) * rh).array().tanh().matrix();
  Vector out = (1.0 - z.array()).matrix().cwiseProduct(h_prev) + z.cwiseProduct(n);
  if (cache) {
    cache->h_prev = h_prev;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->n = std::move(n);
    cache->rh = std::move(rh);
  }
  return out;
}

Vector gru_cell(const Vector& x, const Vector& h_prev, const GruWeights& wt) {
  const Eigen::Index h = h_prev.size();
  if (h == 0 || wt.u.rows() != 3 * h || wt.u.cols() != h || wt.w.rows() != 3 * h ||
      wt.w.cols() != x.size() || wt.b.size() != 3 * h) {
    throw ModelError("gru_cell: dimension mismatch");
  }
  if (!x.allFinite() || !h_prev.allFinite()) throw ModelError("gru_cell: non-finite input");
  return gru_forward(wt.w * x + wt.b, h_prev, wt.u);
}

GruGradients gru_backward(const Vector& d_h, const GruCache& c, const Matrix& u, Matrix& d_u) {
  const Eigen::Index h = d_h.size();
  GruGradients g;
  g.d_input_proj.resize(3 * h);

  Vector dz = d_h.cwiseProduct(c.n - c.h_prev);
  Vector dn = d_h.cwiseProduct(c.z);
  g.d_h_prev = d_h.cwiseProduct((1.0 - c.z.array()).matrix());

  Vector dan = dn.cwiseProduct((1.0 - c.n.array().square()).matrix());
  Vector d_rh = u.bottomRows(h).transpose() * dan;
  d_u.bottomRows(h).noalias() += dan * c.rh.transpose();
  Vector dr = d_rh.cwiseProduct(c.h_prev);
  g.d_h_prev += d_rh.cwiseProduct(c.r);

  g.d_input_proj.head(h) = dz.cwiseProduct(c.z.cwiseProduct((1.0 - c.z.array()).matrix()));
  g.d_input_proj.segment(h, h) = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
  g.d_input_proj.tail(h) = dan;

  d_u.topRows(2 * h).noalias() += g.d_input_proj.head(2 * h) * c.h_prev.transpose();
  g.d_h_prev.noalias() += u.topRows(2 * h).transpose() * g.d_input_proj.head(2 * h);
  return g;
}

}  // namespace adlog
