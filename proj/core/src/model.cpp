#include "adlog/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  visit([&](std::string_view, const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  visit([&](std::string_view, const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

void ModelParams::set_zero() {
  visit([](std::string_view, auto& t) { t.setZero(); });
}

std::array<TensorView, kTensorCount> tensor_views(const ModelParams& p) {
  std::array<TensorView, kTensorCount> views{};
  std::size_t i = 0;
  p.visit([&](std::string_view name, const auto& t) {
    views[i++] = {name, static_cast<std::size_t>(t.rows()), static_cast<std::size_t>(t.cols()),
                  t.data()};
  });
  return views;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  auto va = tensor_views(a);
  auto vb = tensor_views(b);
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    if (va[i].rows != vb[i].rows || va[i].cols != vb[i].cols) return false;
    if (!std::equal(va[i].data, va[i].data + va[i].size(), vb[i].data)) return false;
  }
  return true;
}

ModelParams zero_params(std::size_t vocab_size, std::size_t hidden_size) {
  const auto v = static_cast<Eigen::Index>(vocab_size);
  const auto h = static_cast<Eigen::Index>(hidden_size);
  ModelParams p;
  p.embedding = Matrix::Zero(v, h);
  p.enc_w = Matrix::Zero(3 * h, h);
  p.enc_u = Matrix::Zero(3 * h, h);
  p.enc_b = Vector::Zero(3 * h);
  p.att_w = Matrix::Zero(h, h);
  p.att_u = Matrix::Zero(h, h);
  p.att_v = Vector::Zero(h);
  p.dec_wy = Matrix::Zero(3 * h, h);
  p.dec_wc = Matrix::Zero(3 * h, h);
  p.dec_u = Matrix::Zero(3 * h, h);
  p.dec_b = Vector::Zero(3 * h);
  p.out_w = Matrix::Zero(v, h);
  p.out_b = Vector::Zero(v);
  return p;
}

ModelParams init_params(std::size_t vocab_size, std::size_t hidden_size, std::uint64_t seed) {
  if (vocab_size == 0 || hidden_size == 0) {
    throw ModelError("vocabulary and hidden sizes must be positive");
  }
  ModelParams p = zero_params(vocab_size, hidden_size);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  p.visit([&](std::string_view, auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  });
  return p;
}

void check_shapes(const ModelParams& p) {
  const auto h = p.att_v.size();
  const auto v = p.out_b.size();
  auto expect = [](bool ok, const char* name) {
    if (!ok) throw ModelError(fmt::format("tensor '{}' has inconsistent shape", name));
  };
  expect(h > 0 && v > 0, "att_v/out_b");
  expect(p.embedding.rows() == v && p.embedding.cols() == h, "embedding");
  for (auto [t, name] : {std::pair{&p.enc_w, "enc_w"}, {&p.enc_u, "enc_u"}, {&p.dec_wy, "dec_wy"},
                         {&p.dec_wc, "dec_wc"}, {&p.dec_u, "dec_u"}}) {
    expect(t->rows() == 3 * h && t->cols() == h, name);
  }
  expect(p.enc_b.size() == 3 * h, "enc_b");
  expect(p.dec_b.size() == 3 * h, "dec_b");
  expect(p.att_w.rows() == h && p.att_w.cols() == h, "att_w");
  expect(p.att_u.rows() == h && p.att_u.cols() == h, "att_u");
  expect(p.out_w.rows() == v && p.out_w.cols() == h, "out_w");
}

double squared_norm(const ModelParams& p) {
  double s = 0.0;
  p.visit([&](std::string_view, const auto& t) { s += t.squaredNorm(); });
  return s;
}

void axpy(ModelParams& a, double scale, const ModelParams& b) {
  auto vb = tensor_views(b);
  std::size_t i = 0;
  a.visit([&](std::string_view, auto& t) {
    const TensorView& other = vb[i++];
    if (other.size() != static_cast<std::size_t>(t.size())) {
      throw ModelError(fmt::format("axpy: tensor '{}' size mismatch", other.name));
    }
    Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) +=
        scale * Eigen::Map<const Eigen::VectorXd>(other.data, t.size());
  });
}

}  // namespace adlog
