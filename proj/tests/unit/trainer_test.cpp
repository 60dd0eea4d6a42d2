#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "adlog/error.hpp"
#include "adlog/seq2seq.hpp"
#include "adlog/trainer.hpp"

using namespace adlog;

namespace {

SequencePair make_pair(std::vector<TokenId> in, std::vector<TokenId> tgt) {
  SequencePair p;
  p.input.tokens = std::move(in);
  p.target.tokens = std::move(tgt);
  p.input.context = p.target.context = "udp";
  return p;
}

SequencePair sample_pair() {
  return make_pair({3, 4, 5, 6, 7, 8, 3, 5, 4, 6, 7, 8}, {3, 9, 10, 6, 11, 8, 3, 10, 9, 6, 12, 8});
}

}  // namespace

TEST(Trainer, ConfigValidation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.teacher_forcing = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.lr_start = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = TrainConfig{};
  c.hidden_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Trainer, ExponentialSchedule) {
  TrainConfig c;
  c.iterations = 101;
  c.lr_start = 0.01;
  c.lr_end = 0.0001;
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 0), 0.01);
  EXPECT_NEAR(learning_rate_at(c, 50), 0.001, 1e-15);
  EXPECT_NEAR(learning_rate_at(c, 100), 0.0001, 1e-15);
  c.schedule = LrSchedule::kConstant;
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 100), 0.01);
}

TEST(Trainer, StepAppliesSgdUpdate) {
  ModelParams p = init_params(13, 6, 1);
  ModelParams before = p;
  SequencePair pair = sample_pair();
  ModelParams g;
  std::size_t steps = 0;
  loss_and_gradient(p, pair.input.tokens, pair.target.tokens, Feeding::kTeacherForced, g, &steps);
  std::mt19937_64 rng(1);
  StepResult r = train_step(pair, p, 0.01, 1.0, rng, 1e9, LossReduction::kMean);
  EXPECT_TRUE(r.teacher_forced);
  EXPECT_FALSE(r.clipped);
  EXPECT_EQ(r.steps, steps);
  ModelParams want = before;
  axpy(want, -0.01, g);
  EXPECT_TRUE(p == want);

  ModelParams q = before;
  std::mt19937_64 rng2(1);
  train_step(pair, q, 0.01, 1.0, rng2, 1e9, LossReduction::kSum);
  ModelParams want_sum = before;
  axpy(want_sum, -0.01 * static_cast<double>(steps), g);
  EXPECT_TRUE(q == want_sum);
}

TEST(Trainer, ClippingBoundsTheUpdate) {
  ModelParams p = init_params(13, 6, 2);
  ModelParams before = p;
  std::mt19937_64 rng(1);
  StepResult r = train_step(sample_pair(), p, 1.0, 1.0, rng, 1e-3, LossReduction::kMean);
  EXPECT_TRUE(r.clipped);
  EXPECT_GT(r.grad_norm, 1e-3);
  ModelParams delta = p;
  axpy(delta, -1.0, before);
  EXPECT_NEAR(std::sqrt(squared_norm(delta)), 1e-3, 1e-12);
}

TEST(Trainer, TeacherForcingCoinPerPair) {
  std::mt19937_64 rng(3);
  ModelParams p = init_params(13, 4, 3);
  int forced = 0;
  for (int i = 0; i < 200; ++i) forced += train_step(sample_pair(), p, 0.0, 0.5, rng).teacher_forced;
  EXPECT_GT(forced, 70);
  EXPECT_LT(forced, 130);
  for (int i = 0; i < 20; ++i) EXPECT_FALSE(train_step(sample_pair(), p, 0.0, 0.0, rng).teacher_forced);
}

TEST(Trainer, EmptyInputRejected) {
  ModelParams p = init_params(13, 4, 3);
  std::mt19937_64 rng(3);
  EXPECT_THROW(train_step(make_pair({}, {3}), p, 0.01, 1.0, rng), TrainingError);
}

TEST(Trainer, NonFiniteLossAborts) {
  ModelParams p = init_params(13, 4, 3);
  p.out_b[4] = std::nan("");
  std::mt19937_64 rng(3);
  EXPECT_THROW(train_step(sample_pair(), p, 0.01, 1.0, rng), TrainingError);
}

TEST(Trainer, OverfitsOnePair) {
  SequencePair pair = sample_pair();
  std::vector<SequencePair> pairs{pair};
  TrainConfig c;
  c.hidden_size = 32;
  c.iterations = 500;
  c.lr_start = c.lr_end = 0.01;
  c.schedule = LrSchedule::kConstant;
  c.teacher_forcing = 1.0;
  c.log_every = 10;
  c.seed = 4;
  TrainResult r = train(pairs, 13, c);
  const auto& h = r.history.points;
  ASSERT_EQ(h.size(), 50u);
  EXPECT_LT(h.back().mean_nll, 0.1 * h.front().mean_nll);
  for (std::size_t i = 10; i < h.size(); ++i) EXPECT_LT(h[i].mean_nll, h[i - 1].mean_nll);
  EXPECT_EQ(predict(r.params, pair.input.tokens, 100).tokens, pair.target.tokens);
}

TEST(Trainer, LogsEveryInterval) {
  std::vector<SequencePair> pairs{sample_pair()};
  TrainConfig c;
  c.hidden_size = 4;
  c.iterations = 250;
  c.log_every = 100;
  TrainResult r = train(pairs, 13, c);
  ASSERT_EQ(r.history.points.size(), 2u);
  EXPECT_EQ(r.history.points[0].iteration, 100);
  EXPECT_EQ(r.history.points[1].iteration, 200);
}

TEST(Trainer, ResumeIsBitExact) {
  std::vector<SequencePair> pairs{sample_pair(),
                                  make_pair({5, 6, 7}, {8, 9}),
                                  make_pair({9, 9, 3}, {4, 12, 11})};
  TrainConfig c;
  c.hidden_size = 8;
  c.iterations = 120;
  c.log_every = 25;
  c.seed = 9;
  Trainer full(init_params(13, 8, 9), c);
  full.run(pairs);

  Trainer first(init_params(13, 8, 9), c);
  first.run(pairs, 55);
  Trainer second(first.params(), c, first.state());
  second.run(pairs);
  EXPECT_TRUE(full.params() == second.params());
  EXPECT_EQ(full.state(), second.state());
}

TEST(Trainer, DeterministicPerSeed) {
  std::vector<SequencePair> pairs{sample_pair(), make_pair({5, 6, 7}, {8, 9})};
  TrainConfig c;
  c.hidden_size = 6;
  c.iterations = 40;
  auto a = train(pairs, 13, c), b = train(pairs, 13, c);
  EXPECT_TRUE(a.params == b.params);
  c.seed = 99;
  EXPECT_FALSE(train(pairs, 13, c).params == a.params);
}

TEST(Trainer, EmptyCorpusRejected) {
  TrainConfig c;
  c.hidden_size = 4;
  EXPECT_THROW(train({}, 13, c), TrainingError);
}
