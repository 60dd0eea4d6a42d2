#include "adlog/trainer.hpp"

#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "adlog/error.hpp"
#include "adlog/seq2seq.hpp"

namespace adlog {
namespace {

// Keeps the sampling stream independent of the initialisation stream.
constexpr std::uint64_t kSamplingSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace

void TrainConfig::validate() const {
  if (hidden_size == 0) throw ConfigError("hidden_size must be positive");
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (!(lr_start > 0.0) || (schedule == LrSchedule::kExponential && !(lr_end > 0.0))) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(teacher_forcing >= 0.0 && teacher_forcing <= 1.0)) {
    throw ConfigError("teacher_forcing must lie in [0, 1]");
  }
  if (max_len == 0) throw ConfigError("max_len must be positive");
  if (log_every <= 0) throw ConfigError("log_every must be positive");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
}

double learning_rate_at(const TrainConfig& c, std::int64_t iteration) {
  if (c.schedule == LrSchedule::kConstant || c.iterations <= 1 || c.lr_start == 0.0) {
    return c.lr_start;
  }
  const double frac = static_cast<double>(iteration) / static_cast<double>(c.iterations - 1);
  return c.lr_start * std::pow(c.lr_end / c.lr_start, std::min(frac, 1.0));
}

StepResult train_step(const SequencePair& pair, ModelParams& params, double lr,
                      double teacher_forcing, std::mt19937_64& rng, double clip_norm,
                      LossReduction reduction) {
  if (pair.input.tokens.empty()) throw TrainingError("training pair has an empty input");
  std::bernoulli_distribution coin(teacher_forcing);
  StepResult r;
  r.teacher_forced = coin(rng);
  ModelParams grads;
  r.loss = loss_and_gradient(params, pair.input.tokens, pair.target.tokens,
                             r.teacher_forced ? Feeding::kTeacherForced : Feeding::kFreeRunning,
                             grads, &r.steps);
  if (!std::isfinite(r.loss)) {
    throw TrainingError(fmt::format("non-finite loss {} (context '{}', {} -> {} tokens)", r.loss,
                                    pair.input.context, pair.input.tokens.size(),
                                    pair.target.tokens.size()));
  }
  double scale = 1.0;
  r.grad_norm = std::sqrt(squared_norm(grads));
  if (r.grad_norm > clip_norm) {
    r.clipped = true;
    scale = clip_norm / r.grad_norm;
  }
  if (reduction == LossReduction::kSum) scale *= static_cast<double>(r.steps);
  if (lr != 0.0) axpy(params, -lr * scale, grads);
  return r;
}

Trainer::Trainer(ModelParams params, TrainConfig config)
    : params_(std::move(params)), config_(config), rng_(config.seed ^ kSamplingSalt) {
  config_.validate();
  check_shapes(params_);
}

Trainer::Trainer(ModelParams params, TrainConfig config, const TrainerState& s)
    : Trainer(std::move(params), config) {
  std::istringstream in(s.rng_state);
  in >> rng_;
  if (!in) throw FormatError("corrupt trainer RNG state");
  iteration_ = s.iteration;
  clip_count_ = s.clip_count;
  window_sum_ = s.window_sum;
  window_count_ = s.window_count;
  history_ = s.history;
}

void Trainer::run(std::span<const SequencePair> pairs, std::int64_t until) {
  if (pairs.empty()) throw TrainingError("no training pairs");
  until = std::min(until, config_.iterations);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  while (iteration_ < until) {
    const std::size_t idx = pick(rng_);
    const double lr = learning_rate_at(config_, iteration_);
    StepResult r;
    try {
      r = train_step(pairs[idx], params_, lr, config_.teacher_forcing, rng_, config_.clip_norm,
                     config_.reduction);
    } catch (const TrainingError& e) {
      throw TrainingError(fmt::format("iteration {}, pair {}: {}", iteration_, idx, e.what()));
    }
    ++iteration_;
    if (r.clipped) ++clip_count_;
    window_sum_ += r.loss;
    ++window_count_;
    if (iteration_ % config_.log_every == 0) {
      history_.points.push_back({iteration_, window_sum_ / static_cast<double>(window_count_)});
      window_sum_ = 0.0;
      window_count_ = 0;
    }
  }
}

TrainerState Trainer::state() const {
  TrainerState s;
  s.iteration = iteration_;
  s.clip_count = clip_count_;
  s.window_sum = window_sum_;
  s.window_count = window_count_;
  std::ostringstream out;
  out << rng_;
  s.rng_state = out.str();
  s.history = history_;
  return s;
}

TrainResult train(std::span<const SequencePair> pairs, std::size_t vocab_size,
                  const TrainConfig& config) {
  config.validate();
  Trainer trainer(init_params(vocab_size, config.hidden_size, config.seed), config);
  trainer.run(pairs);
  return {trainer.params(), trainer.history(), trainer.clip_count()};
}

}  // namespace adlog
