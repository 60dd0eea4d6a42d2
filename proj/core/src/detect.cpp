#include "adlog/detect.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {

std::vector<Prediction> predict_all(const ModelParams& params,
                                    std::span<const SequencePair> pairs, std::size_t max_len) {
  std::vector<Prediction> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(predict(params, p.input.tokens, max_len));
  return out;
}

BleuReport accuracy(std::span<const SequencePair> pairs, std::span<const Prediction> predictions,
                    const BleuOptions& options) {
  if (pairs.size() != predictions.size()) throw Error("one prediction per pair expected");
  BleuReport r;
  r.scores.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    r.scores.push_back(bleu1(predictions[i].tokens, pairs[i].target.tokens, options));
  }
  r.mean = mean_score(r.scores);
  return r;
}

BleuReport accuracy(const ModelParams& params, std::span<const SequencePair> pairs,
                    std::size_t max_len, const BleuOptions& options) {
  if (pairs.empty()) throw Error("accuracy over an empty test set");
  auto preds = predict_all(params, pairs, max_len);
  return accuracy(pairs, preds, options);
}

TupleExtraction extract_node_tuples(const Vocabulary& vocab, const Tokenizer& tokenizer,
                                    std::span<const SequencePair> pairs,
                                    std::span<const Prediction> predictions) {
  if (pairs.size() != predictions.size()) throw Error("one prediction per pair expected");
  const auto src_slot = tokenizer.source_slot();
  const auto dst_slot = tokenizer.destination_slot();
  if (!src_slot || !dst_slot) throw ConfigError("tokenizer does not expose endpoint slots");
  const std::size_t arity = tokenizer.arity();

  auto node_at = [&](const std::vector<TokenId>& toks, std::size_t pos) {
    return parse_node_token(vocab.token(toks[pos]));
  };

  TupleExtraction out;
  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    const auto& truth = pairs[pi].target.tokens;
    const auto& pred = predictions[pi];
    const std::size_t events = std::min(truth.size(), pred.tokens.size()) / arity;
    for (std::size_t e = 0; e < events; ++e) {
      const std::size_t base = e * arity;
      auto src = node_at(truth, base + *src_slot);
      auto actual = node_at(truth, base + *dst_slot);
      auto pred_src = node_at(pred.tokens, base + *src_slot);
      auto predicted = node_at(pred.tokens, base + *dst_slot);
      if (!src || !actual || !pred_src || !predicted) {
        ++out.skipped;
        continue;
      }
      if (*pred_src != *src) {
        ++out.misaligned;
        continue;
      }
      const std::size_t step = base + *dst_slot;
      const TokenId pred_tok = pred.tokens[step];
      out.tuples.push_back({{*src, *actual, *predicted},
                            pred.distributions[step][pred_tok],
                            pairs[pi].target.span.start,
                            pi,
                            e});
    }
  }
  return out;
}

TupleExtraction extract_node_tuples(const ModelParams& params, const Vocabulary& vocab,
                                    const Tokenizer& tokenizer,
                                    std::span<const SequencePair> pairs, std::size_t max_len) {
  auto preds = predict_all(params, pairs, max_len);
  return extract_node_tuples(vocab, tokenizer, pairs, preds);
}

TopSet top_set(std::span<const ScoredTuple> tuples, std::size_t k) {
  if (k == 0) throw ConfigError("set A size must be at least 1");
  std::vector<ScoredTuple> sorted(tuples.begin(), tuples.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const ScoredTuple& a, const ScoredTuple& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    if (a.time != b.time) return a.time < b.time;
    if (a.pair_index != b.pair_index) return a.pair_index < b.pair_index;
    if (a.event_index != b.event_index) return a.event_index < b.event_index;
    return a.tuple.node < b.tuple.node;
  });
  TopSet out;
  out.shortfall = sorted.size() < k;
  sorted.resize(std::min(k, sorted.size()));
  out.entries = std::move(sorted);
  return out;
}

const char* to_string(Label label) {
  return label == Label::kAnomalous ? "anomalous" : "benign";
}

Classification classify(std::span<const ScoredTuple> set, const GatewayMap& gateways) {
  auto gateway = [&](NodeId n) {
    auto it = gateways.find(n);
    if (it == gateways.end()) {
      throw ConfigError(fmt::format("node {} has no gateway assignment", n.value));
    }
    return it->second;
  };
  Classification c;
  for (const ScoredTuple& st : set) {
    const NodeTuple& t = st.tuple;
    const std::size_t g_node = gateway(t.node);
    gateway(t.actual_server);
    const std::size_t g_pred = gateway(t.predicted_server);
    const bool anomalous = t.predicted_server != t.actual_server && g_node != g_pred;
    c.labels.push_back(anomalous ? Label::kAnomalous : Label::kBenign);
    if (anomalous) {
      NodePair p = NodePair::of(t.node, t.predicted_server);
      if (std::find(c.flagged_pairs.begin(), c.flagged_pairs.end(), p) == c.flagged_pairs.end()) {
        c.flagged_pairs.push_back(p);
      }
    }
  }
  return c;
}

ModelEvaluation evaluate_model(const ModelParams& params, const Vocabulary& vocab,
                               const Tokenizer& tokenizer, std::span<const SequencePair> test,
                               const GatewayMap& gateways, const EvalOptions& options) {
  if (test.empty()) throw Error("evaluation needs a non-empty test set");
  if (vocab.size() != params.vocab_size()) {
    throw ModelError("vocabulary does not match the model's output layer");
  }
  auto preds = predict_all(params, test, options.max_len);
  ModelEvaluation ev;
  ev.bleu = accuracy(test, preds, options.bleu);
  ev.tuples = extract_node_tuples(vocab, tokenizer, test, preds);
  ev.set_a = top_set(ev.tuples.tuples, options.k);
  ev.classification = classify(ev.set_a.entries, gateways);
  return ev;
}

DetectionReport compare_models(const ScoredModel& attack_model, const ScoredModel& clean_model,
                               std::span<const SequencePair> test_attack,
                               std::span<const SequencePair> test_clean,
                               const Tokenizer& tokenizer, const GatewayMap& gateways,
                               const EvalOptions& options, std::optional<NodePair> ground_truth) {
  if (!(attack_model.vocab == clean_model.vocab)) {
    throw ModelError("attack and clean models use different vocabularies");
  }
  DetectionReport r;
  r.attack = evaluate_model(attack_model.params, attack_model.vocab, tokenizer, test_attack,
                            gateways, options);
  r.clean = evaluate_model(clean_model.params, clean_model.vocab, tokenizer, test_clean, gateways,
                           options);
  r.accuracy_with_attack = r.attack.bleu.mean;
  r.accuracy_without_attack = r.clean.bleu.mean;
  r.degradation = r.accuracy_without_attack - r.accuracy_with_attack;
  r.flagged_pairs = r.attack.classification.flagged_pairs;
  r.ground_truth = ground_truth;
  if (ground_truth) {
    r.recall = std::find(r.flagged_pairs.begin(), r.flagged_pairs.end(), *ground_truth) !=
               r.flagged_pairs.end();
  }
  return r;
}

}  // namespace adlog
