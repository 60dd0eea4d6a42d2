#include "adlog/gradient_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adlog/seq2seq.hpp"

namespace adlog {

double relative_error(double analytic, double numeric) {
  const double denom = std::max(std::abs(analytic), std::abs(numeric));
  if (denom == 0.0) return 0.0;
  return std::abs(analytic - numeric) / denom;
}

GradientCheckResult gradient_check(const ModelParams& params, std::span<const TokenId> input,
                                   std::span<const TokenId> target,
                                   const GradientCheckOptions& opt) {
  ModelParams grads;
  loss_and_gradient(params, input, target, Feeding::kTeacherForced, grads);
  const auto analytic = tensor_views(grads);

  ModelParams probe = params;
  std::mt19937_64 rng(opt.seed);
  GradientCheckResult result;
  std::size_t ti = 0;
  probe.visit([&](std::string_view name, auto& tensor) {
    const auto size = static_cast<std::size_t>(tensor.size());
    std::vector<std::size_t> coords(size);
    std::iota(coords.begin(), coords.end(), 0);
    if (size > opt.samples_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(opt.samples_per_tensor);
    }
    TensorGradientCheck tc{std::string(name), coords.size(), 0.0};
    for (std::size_t c : coords) {
      double& theta = tensor.data()[c];
      const double saved = theta;
      theta = saved + opt.eps;
      const double plus = sequence_loss(probe, input, target, Feeding::kTeacherForced);
      theta = saved - opt.eps;
      const double minus = sequence_loss(probe, input, target, Feeding::kTeacherForced);
      theta = saved;
      const double numeric = (plus - minus) / (2.0 * opt.eps);
      tc.max_relative_error =
          std::max(tc.max_relative_error, relative_error(analytic[ti].data[c], numeric));
    }
    result.max_relative_error = std::max(result.max_relative_error, tc.max_relative_error);
    result.coordinates += tc.checked;
    result.tensors.push_back(std::move(tc));
    ++ti;
  });
  return result;
}

}  // namespace adlog
