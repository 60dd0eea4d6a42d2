#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adlog/tokenizer.hpp"
#include "adlog/trace_event.hpp"
#include "adlog/vocabulary.hpp"

namespace adlog {

struct TimeSpan {
  double start = 0.0;
  double end = 0.0;

  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

struct EventSequence {
  std::vector<TokenId> tokens;
  std::string context;
  TimeSpan span;

  friend bool operator==(const EventSequence&, const EventSequence&) = default;
};

struct SequencePair {
  EventSequence input;
  EventSequence target;

  friend bool operator==(const SequencePair&, const SequencePair&) = default;
};

inline constexpr std::size_t kDefaultMaxLen = 100;

// Flattens every event's tokens in stream order.
std::vector<std::string> token_stream(std::span<const TraceEvent> events,
                                      const Tokenizer& tokenizer);

// Partitions time-ordered events by protocol context (contexts in order of
// first appearance), then packs whole events greedily into sequences of at
// most `max_len` tokens. An event's tokens never straddle two sequences.
std::vector<EventSequence> segment_sequences(std::span<const TraceEvent> events,
                                             const Tokenizer& tokenizer, const Vocabulary& vocab,
                                             std::size_t max_len = kDefaultMaxLen);

// Consecutive sequences of the same context form (s_i, s_{i+1}) pairs.
std::vector<SequencePair> pair_sequences(std::span<const EventSequence> sequences);

struct TrainTestSplit {
  std::vector<SequencePair> train;
  std::vector<SequencePair> test;
};

// Seeded split; round(n * test_fraction) pairs go to test, both halves keep
// their original relative order. Throws ConfigError unless 0 < fraction < 1.
TrainTestSplit split_train_test(std::span<const SequencePair> pairs, double test_fraction,
                                std::uint64_t seed);

}  // namespace adlog
