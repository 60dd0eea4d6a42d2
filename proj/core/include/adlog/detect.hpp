#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "adlog/bleu.hpp"
#include "adlog/model.hpp"
#include "adlog/scenario.hpp"
#include "adlog/seq2seq.hpp"
#include "adlog/sequences.hpp"
#include "adlog/tokenizer.hpp"
#include "adlog/vocabulary.hpp"

namespace adlog {

struct NodeTuple {
  NodeId node;
  NodeId actual_server;
  NodeId predicted_server;

  friend bool operator==(const NodeTuple&, const NodeTuple&) = default;
};

struct ScoredTuple {
  NodeTuple tuple;
  double probability = 0.0;  // model probability of the predicted destination token
  double time = 0.0;         // start of the target window the event belongs to
  std::size_t pair_index = 0;
  std::size_t event_index = 0;
};

struct TupleExtraction {
  std::vector<ScoredTuple> tuples;
  std::size_t skipped = 0;     // aligned events whose endpoints are not node tokens
  std::size_t misaligned = 0;  // aligned events whose predicted source differs
};

// Greedy predictions for every pair, in order.
std::vector<Prediction> predict_all(const ModelParams& params,
                                    std::span<const SequencePair> pairs, std::size_t max_len);

BleuReport accuracy(std::span<const SequencePair> pairs, std::span<const Prediction> predictions,
                    const BleuOptions& options = {});
BleuReport accuracy(const ModelParams& params, std::span<const SequencePair> pairs,
                    std::size_t max_len, const BleuOptions& options = {});

// Walks predicted and ground-truth targets event by event (the tokenizer
// arity fixes the slot of every field). Where both events carry the same
// source node, emits (source, true destination, predicted destination)
// scored with the model's probability for the predicted destination token.
TupleExtraction extract_node_tuples(const Vocabulary& vocab, const Tokenizer& tokenizer,
                                    std::span<const SequencePair> pairs,
                                    std::span<const Prediction> predictions);
TupleExtraction extract_node_tuples(const ModelParams& params, const Vocabulary& vocab,
                                    const Tokenizer& tokenizer,
                                    std::span<const SequencePair> pairs, std::size_t max_len);

struct TopSet {
  std::vector<ScoredTuple> entries;
  bool shortfall = false;  // fewer than k tuples were available
};

// Highest probability first; ties go to the earlier timestamp, then to the
// earlier event, then to the lower source node. Throws for k == 0.
TopSet top_set(std::span<const ScoredTuple> tuples, std::size_t k);

enum class Label { kBenign, kAnomalous };

const char* to_string(Label label);

// Unordered node pair stored as (min, max).
struct NodePair {
  NodeId first;
  NodeId second;

  static NodePair of(NodeId a, NodeId b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct Classification {
  std::vector<Label> labels;            // parallel to the classified set
  std::vector<NodePair> flagged_pairs;  // distinct, in order of first flag
};

// A tuple is anomalous iff the prediction is wrong and the source and the
// predicted server sit behind different gateways. Throws ConfigError for a
// node missing from the gateway map.
Classification classify(std::span<const ScoredTuple> set, const GatewayMap& gateways);

struct EvalOptions {
  std::size_t k = 5;
  std::size_t max_len = kDefaultMaxLen;
  BleuOptions bleu;
};

struct ModelEvaluation {
  BleuReport bleu;
  TupleExtraction tuples;
  TopSet set_a;
  Classification classification;
};

ModelEvaluation evaluate_model(const ModelParams& params, const Vocabulary& vocab,
                               const Tokenizer& tokenizer, std::span<const SequencePair> test,
                               const GatewayMap& gateways, const EvalOptions& options = {});

struct DetectionReport {
  ModelEvaluation attack;
  ModelEvaluation clean;
  double accuracy_with_attack = 0.0;
  double accuracy_without_attack = 0.0;
  double degradation = 0.0;  // without - with, percentage points
  std::vector<NodePair> flagged_pairs;
  std::optional<NodePair> ground_truth;
  std::optional<bool> recall;  // ground truth among the flagged pairs
};

struct ScoredModel {
  const ModelParams& params;
  const Vocabulary& vocab;
};

// Both models are evaluated with the same options; throws ModelError when
// the vocabularies differ.
DetectionReport compare_models(const ScoredModel& attack_model, const ScoredModel& clean_model,
                               std::span<const SequencePair> test_attack,
                               std::span<const SequencePair> test_clean,
                               const Tokenizer& tokenizer, const GatewayMap& gateways,
                               const EvalOptions& options = {},
                               std::optional<NodePair> ground_truth = std::nullopt);

}  // namespace adlog
