#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "adlog/bleu.hpp"
#include "adlog/detect.hpp"
#include "adlog/error.hpp"
#include "adlog/report.hpp"
#include "oracles.hpp"

using namespace adlog;

namespace {

// Gateway 0 holds even nodes, gateway 1 odd nodes.
GatewayMap even_odd(std::uint32_t nodes = 16) {
  GatewayMap g;
  for (std::uint32_t n = 0; n < nodes; ++n) g[NodeId(n)] = n % 2;
  return g;
}

ScoredTuple scored(std::uint32_t node, std::uint32_t actual, std::uint32_t predicted, double p,
                   double time = 0.0, std::size_t pair = 0, std::size_t event = 0) {
  return {{NodeId(node), NodeId(actual), NodeId(predicted)}, p, time, pair, event};
}

Vocabulary event_vocab() {
  Vocabulary v;
  for (const char* t : {"+", "-", "r", "udp", "s0", "s1", "-------"}) v.add(t);
  for (std::uint32_t n = 0; n < 16; ++n) v.add(node_token(NodeId(n)));
  return v;
}

std::vector<TokenId> ev(const Vocabulary& v, std::uint32_t from, std::uint32_t to) {
  return v.encode(std::vector<std::string>{"r", node_token(NodeId(from)), node_token(NodeId(to)),
                                           "udp", "s0", "-------"});
}

std::vector<TokenId> cat(std::initializer_list<std::vector<TokenId>> parts) {
  std::vector<TokenId> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Prediction one_hot_prediction(const std::vector<TokenId>& tokens, std::size_t vocab, double p) {
  Prediction pred;
  pred.tokens = tokens;
  for (TokenId t : tokens) {
    Vector d = Vector::Constant(static_cast<Eigen::Index>(vocab),
                                (1.0 - p) / static_cast<double>(vocab - 1));
    d[t] = p;
    pred.distributions.push_back(d);
  }
  Vector eos = Vector::Zero(static_cast<Eigen::Index>(vocab));
  eos[kEos] = 1.0;
  pred.distributions.push_back(eos);
  return pred;
}

}  // namespace

TEST(Bleu, HandCountedExample) {
  std::vector<TokenId> pred{3, 3, 4}, ref{3, 4, 5};
  EXPECT_NEAR(bleu1(pred, ref), 100.0 * 2.0 / 3.0, 1e-12);
}

TEST(Bleu, IdentityAndBounds) {
  std::vector<TokenId> x{3, 4, 5, 3};
  EXPECT_DOUBLE_EQ(bleu1(x, x), 100.0);
  EXPECT_DOUBLE_EQ(bleu1(std::vector<TokenId>{}, x), 0.0);
  EXPECT_THROW(bleu1(x, std::vector<TokenId>{}), Error);
}

TEST(Bleu, BrevityPenalty) {
  std::vector<TokenId> pred{3, 4}, ref{3, 4, 5, 6};
  EXPECT_NEAR(bleu1(pred, ref), 100.0 * std::exp(1.0 - 2.0), 1e-12);
  EXPECT_NEAR(bleu1(pred, ref, {.brevity_penalty = false}), 100.0, 1e-12);
}

TEST(Bleu, MatchesBruteForceOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<TokenId> tok(3, 8);
  std::uniform_int_distribution<std::size_t> len(0, 12);
  for (int c = 0; c < 200; ++c) {
    std::vector<TokenId> pred(len(rng)), ref(1 + len(rng));
    for (auto& t : pred) t = tok(rng);
    for (auto& t : ref) t = tok(rng);
    for (bool bp : {true, false}) {
      double got = bleu1(pred, ref, {.brevity_penalty = bp});
      EXPECT_NEAR(got, oracle::bleu1({pred.begin(), pred.end()}, {ref.begin(), ref.end()}, bp),
                  1e-12);
      EXPECT_GE(got, 0.0);
      EXPECT_LE(got, 100.0);
    }
  }
}

TEST(Bleu, MeanScore) {
  EXPECT_DOUBLE_EQ(mean_score(std::vector<double>{80.0, 100.0}), 90.0);
  EXPECT_THROW(mean_score(std::vector<double>{}), Error);
}

TEST(Detect, AccuracyIsPermutationInvariant) {
  std::vector<SequencePair> pairs(3);
  std::vector<Prediction> preds(3);
  pairs[0].target.tokens = {3, 4};
  pairs[1].target.tokens = {3, 5, 6};
  pairs[2].target.tokens = {7};
  preds[0].tokens = {3, 4};
  preds[1].tokens = {3};
  preds[2].tokens = {8};
  BleuReport a = accuracy(pairs, preds);
  std::swap(pairs[0], pairs[2]);
  std::swap(preds[0], preds[2]);
  BleuReport b = accuracy(pairs, preds);
  EXPECT_DOUBLE_EQ(a.mean, b.mean);
  EXPECT_THROW(accuracy(std::span<const SequencePair>{}, std::span<const Prediction>{}), Error);
}

TEST(Detect, ExtractsMismatchedDestination) {
  Vocabulary v = event_vocab();
  FieldTupleTokenizer tok;
  SequencePair pair;
  pair.target.tokens = cat({ev(v, 14, 2), ev(v, 6, 15)});
  pair.target.span = {1.5, 2.0};
  auto pred = one_hot_prediction(cat({ev(v, 14, 15), ev(v, 6, 15)}), v.size(), 0.9);
  std::vector<SequencePair> pairs{pair};
  std::vector<Prediction> preds{pred};
  TupleExtraction ex = extract_node_tuples(v, tok, pairs, preds);
  ASSERT_EQ(ex.tuples.size(), 2u);
  EXPECT_EQ(ex.tuples[0].tuple, (NodeTuple{NodeId(14), NodeId(2), NodeId(15)}));
  EXPECT_EQ(ex.tuples[1].tuple, (NodeTuple{NodeId(6), NodeId(15), NodeId(15)}));
  EXPECT_DOUBLE_EQ(ex.tuples[0].probability, 0.9);
  EXPECT_DOUBLE_EQ(ex.tuples[0].time, 1.5);
  EXPECT_EQ(ex.tuples[1].event_index, 1u);
}

TEST(Detect, CountsMisalignedAndSkipped) {
  Vocabulary v = event_vocab();
  FieldTupleTokenizer tok;
  SequencePair pair;
  pair.target.tokens = cat({ev(v, 14, 2), ev(v, 6, 15), ev(v, 8, 9)});
  auto predicted = cat({ev(v, 3, 2), ev(v, 6, 15)});
  predicted[6 + 2] = v.index_of("udp");  // destination slot holds a non-node token
  std::vector<SequencePair> pairs{pair};
  std::vector<Prediction> preds{one_hot_prediction(predicted, v.size(), 0.5)};
  TupleExtraction ex = extract_node_tuples(v, tok, pairs, preds);
  EXPECT_TRUE(ex.tuples.empty());
  EXPECT_EQ(ex.misaligned, 1u);
  EXPECT_EQ(ex.skipped, 1u);
}

TEST(Detect, EmptyTestSetGivesNoTuples) {
  Vocabulary v = event_vocab();
  FieldTupleTokenizer tok;
  EXPECT_TRUE(extract_node_tuples(v, tok, {}, std::span<const Prediction>{}).tuples.empty());
}

TEST(Detect, TopSetOrdering) {
  std::vector<ScoredTuple> t{scored(2, 3, 3, 0.4, 2.0), scored(6, 15, 15, 0.9, 1.0),
                             scored(8, 9, 9, 0.4, 1.0), scored(0, 12, 12, 0.7, 0.5)};
  TopSet a = top_set(t, 3);
  ASSERT_EQ(a.entries.size(), 3u);
  EXPECT_FALSE(a.shortfall);
  EXPECT_EQ(a.entries[0].tuple.node, NodeId(6));
  EXPECT_EQ(a.entries[1].tuple.node, NodeId(0));
  EXPECT_EQ(a.entries[2].tuple.node, NodeId(8));  // equal score, earlier timestamp

  TopSet one = top_set(std::span(t).first(1), 1);
  EXPECT_EQ(one.entries.size(), 1u);
  TopSet short_set = top_set(t, 10);
  EXPECT_TRUE(short_set.shortfall);
  EXPECT_EQ(short_set.entries.size(), 4u);
  EXPECT_THROW(top_set(t, 0), ConfigError);
}

TEST(Detect, TopSetTieOnTimeUsesLowerSource) {
  std::vector<ScoredTuple> t{scored(9, 8, 8, 0.5, 1.0, 0, 0), scored(3, 2, 2, 0.5, 1.0, 0, 0)};
  EXPECT_EQ(top_set(t, 1).entries[0].tuple.node, NodeId(3));
}

TEST(Detect, ClassifyRule) {
  std::vector<ScoredTuple> set{scored(14, 2, 15, 0.5), scored(6, 15, 15, 0.9),
                               scored(2, 11, 14, 0.4), scored(15, 5, 14, 0.3)};
  Classification c = classify(set, even_odd());
  EXPECT_EQ(c.labels, (std::vector<Label>{Label::kAnomalous, Label::kBenign, Label::kBenign,
                                          Label::kAnomalous}));
  ASSERT_EQ(c.flagged_pairs.size(), 1u);
  EXPECT_EQ(c.flagged_pairs[0], NodePair::of(NodeId(15), NodeId(14)));
  EXPECT_EQ(c.flagged_pairs[0].first, NodeId(14));
}

TEST(Detect, ClassifyNeverFlagsSameGateway) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint32_t> node(0, 15);
  GatewayMap g = even_odd();
  std::vector<ScoredTuple> set;
  for (int i = 0; i < 500; ++i) set.push_back(scored(node(rng), node(rng), node(rng), 0.1));
  Classification c = classify(set, g);
  for (const auto& p : c.flagged_pairs) EXPECT_NE(g.at(p.first), g.at(p.second));
}

TEST(Detect, ClassifyUnknownNodeThrows) {
  std::vector<ScoredTuple> set{scored(40, 2, 15, 0.5)};
  EXPECT_THROW(classify(set, even_odd()), ConfigError);
}

TEST(Detect, SameModelComparedToItselfHasZeroDegradation) {
  Vocabulary v = event_vocab();
  FieldTupleTokenizer tok;
  ModelParams p = init_params(v.size(), 6, 8);
  std::vector<SequencePair> test(2);
  test[0].input.tokens = cat({ev(v, 14, 2)});
  test[0].target.tokens = cat({ev(v, 6, 15)});
  test[1].input.tokens = cat({ev(v, 8, 9)});
  test[1].target.tokens = cat({ev(v, 0, 12)});
  DetectionReport r = compare_models({p, v}, {p, v}, test, test, tok, even_odd(), {},
                                     NodePair::of(NodeId(14), NodeId(15)));
  EXPECT_DOUBLE_EQ(r.degradation, 0.0);
  EXPECT_DOUBLE_EQ(r.accuracy_with_attack, r.accuracy_without_attack);
  ASSERT_TRUE(r.recall);

  std::string text = format_detection_report(r);
  const std::string size_line = "Size of set A: " + std::to_string(r.clean.set_a.entries.size());
  EXPECT_LE(r.clean.set_a.entries.size(), 5u);
  EXPECT_NE(text.find(size_line), std::string::npos);
  auto j = detection_report_to_json(r);
  EXPECT_EQ(j.at("degradation").get<double>(), 0.0);

  Vocabulary other = v;
  other.add("extra");
  ModelParams q = init_params(other.size(), 6, 8);
  EXPECT_THROW(compare_models({p, v}, {q, other}, test, test, tok, even_odd()), ModelError);
}

TEST(Report, CsvFormats) {
  BleuReport b;
  b.scores = {50.0, 100.0};
  b.mean = 75.0;
  std::ostringstream bleu;
  write_bleu_csv(b, bleu);
  EXPECT_EQ(bleu.str(), "pair,bleu\n0,50\n1,100\n");

  LossHistory h;
  h.points = {{100, 2.5}, {200, 1.25}};
  std::ostringstream loss;
  write_loss_csv(h, loss);
  EXPECT_EQ(loss.str(), "iteration,mean_nll\n100,2.5\n200,1.25\n");
}
