#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "adlog/model.hpp"
#include "adlog/sequences.hpp"

namespace adlog {

// How per-step NLL terms are combined into the quantity SGD descends. The
// logged loss is always the per-step mean.
enum class LossReduction {
  kSum,   // gradient of the summed per-step NLL
  kMean,  // gradient of the mean per-step NLL
};

enum class LrSchedule {
  kExponential,  // lr_start * (lr_end / lr_start)^(i / (iterations - 1))
  kConstant,     // lr_start throughout
};

struct TrainConfig {
  std::size_t hidden_size = 256;
  std::int64_t iterations = 70000;
  double lr_start = 0.01;
  double lr_end = 0.0001;
  LrSchedule schedule = LrSchedule::kExponential;
  double teacher_forcing = 0.5;
  std::size_t max_len = kDefaultMaxLen;
  std::uint64_t seed = 1;
  std::int64_t log_every = 100;
  double clip_norm = 5.0;
  LossReduction reduction = LossReduction::kSum;

  // Throws ConfigError.
  void validate() const;
};

struct LossPoint {
  std::int64_t iteration = 0;  // number of steps completed
  double mean_nll = 0.0;       // over the preceding log_every steps

  friend bool operator==(const LossPoint&, const LossPoint&) = default;
};

struct LossHistory {
  std::vector<LossPoint> points;

  friend bool operator==(const LossHistory&, const LossHistory&) = default;
};

double learning_rate_at(const TrainConfig& config, std::int64_t iteration);

struct StepResult {
  double loss = 0.0;        // per-step mean NLL
  std::size_t steps = 0;    // decoder steps taken
  double grad_norm = 0.0;  // mean-loss gradient, before clipping
  bool clipped = false;
  bool teacher_forced = false;
};

// One SGD update on a single pair. A single Bernoulli(teacher_forcing) draw
// decides the feeding mode for the whole pair. The clip applies to the
// gradient of the mean per-step loss: if its global norm exceeds clip_norm it
// is rescaled to clip_norm, and kSum then multiplies the update by the number
// of decoded steps. Throws TrainingError on a non-finite loss.
StepResult train_step(const SequencePair& pair, ModelParams& params, double lr,
                      double teacher_forcing, std::mt19937_64& rng, double clip_norm = 5.0,
                      LossReduction reduction = LossReduction::kSum);

// Everything needed to continue a run bit-for-bit.
struct TrainerState {
  std::int64_t iteration = 0;
  std::int64_t clip_count = 0;
  double window_sum = 0.0;
  std::int64_t window_count = 0;
  std::string rng_state;
  LossHistory history;

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

class Trainer {
 public:
  Trainer(ModelParams params, TrainConfig config);
  Trainer(ModelParams params, TrainConfig config, const TrainerState& resume_from);

  // Runs steps until `iteration() == until` (clamped to config.iterations).
  void run(std::span<const SequencePair> pairs, std::int64_t until);
  void run(std::span<const SequencePair> pairs) { run(pairs, config_.iterations); }

  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  const TrainConfig& config() const { return config_; }
  std::int64_t iteration() const { return iteration_; }
  std::int64_t clip_count() const { return clip_count_; }
  const LossHistory& history() const { return history_; }
  TrainerState state() const;

 private:
  ModelParams params_;
  TrainConfig config_;
  std::mt19937_64 rng_;
  std::int64_t iteration_ = 0;
  std::int64_t clip_count_ = 0;
  double window_sum_ = 0.0;
  std::int64_t window_count_ = 0;
  LossHistory history_;
};

struct TrainResult {
  ModelParams params;
  LossHistory history;
  std::int64_t clip_count = 0;
};

TrainResult train(std::span<const SequencePair> pairs, std::size_t vocab_size,
                  const TrainConfig& config);

}  // namespace adlog
