#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <fmt/ranges.h>

#include "adlog/attention.hpp"
#include "adlog/bleu.hpp"
#include "adlog/checkpoint.hpp"
#include "adlog/experiment.hpp"
#include "adlog/gradient_check.hpp"
#include "adlog/gru.hpp"
#include "adlog/report.hpp"
#include "adlog/seq2seq.hpp"
#include "adlog/simulator.hpp"
#include "adlog/trainer.hpp"
#include "oracles.hpp"

using namespace adlog;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string adlog_binary;

ModelParams scaled_params(std::size_t v, std::size_t h, std::uint64_t seed, double scale) {
  ModelParams p = init_params(v, h, seed);
  p.visit([&](std::string_view, auto& t) { t *= scale * std::sqrt(static_cast<double>(h)); });
  return p;
}

std::vector<TokenId> random_tokens(std::mt19937_64& rng, std::size_t n, std::size_t v) {
  std::uniform_int_distribution<TokenId> d(kReservedTokens, static_cast<TokenId>(v - 1));
  std::vector<TokenId> out(n);
  for (auto& t : out) t = d(rng);
  return out;
}

double max_abs_diff(const Vector& a, const oracle::Vec& b) {
  if (static_cast<std::size_t>(a.size()) != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Desk corpora for seed 1, shared by several criteria.
const PreparedCorpora& desk_corpora() {
  static const PreparedCorpora corpora = [] {
    ExperimentConfig c = make_profile(Profile::kDesk);
    ScenarioTraces t = simulate_scenarios(c.scenario, 1);
    std::vector<std::vector<TraceEvent>> clean{t.clean.events}, attack{t.attack.events};
    return prepare_corpora(clean, attack, c.ingest, 1);
  }();
  return corpora;
}

std::vector<SequencePair> ten_pair_corpus() {
  const auto& train = desk_corpora().clean.train;
  return {train.begin(), train.begin() + 10};
}

const TrainResult& ten_pair_model() {
  static const TrainResult result = [] {
    TrainConfig c = make_profile(Profile::kDesk).train;
    auto pairs = ten_pair_corpus();
    return train(pairs, desk_corpora().clean.vocab.size(), c);
  }();
  return result;
}

// Backpropagated gradients against central differences of the independent
// scalar forward pass, evaluated in extended precision so the quotient at
// eps = 1e-5 is not dominated by rounding of the loss.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  const std::size_t v = 20, h = 8;
  const long double eps = 1e-5L;
  double worst = 0.0;
  std::size_t coordinates = 0, min_per_tensor = SIZE_MAX;
  std::mt19937_64 rng(5);
  for (std::uint64_t instance = 0; instance < 3; ++instance) {
    ModelParams p = scaled_params(v, h, 40 + instance, 0.5);
    auto input = random_tokens(rng, 6 + instance, v);
    auto target = random_tokens(rng, 4 + instance, v);
    const std::vector<std::uint32_t> in(input.begin(), input.end()), tgt(target.begin(), target.end());
    ModelParams grads;
    loss_and_gradient(p, input, target, Feeding::kTeacherForced, grads);
    const auto analytic = tensor_views(grads);
    oracle::BasicModel<long double> probe(p);
    std::mt19937_64 pick(instance);
    for (const TensorView& view : analytic) {
      std::vector<std::size_t> coords(view.size());
      std::iota(coords.begin(), coords.end(), 0);
      if (coords.size() > 100) {
        std::shuffle(coords.begin(), coords.end(), pick);
        coords.resize(100);
      }
      for (std::size_t c : coords) {
        long double& theta = probe.at(std::string(view.name), c);
        const long double saved = theta;
        theta = saved + eps;
        const long double plus = probe.loss(in, tgt);
        theta = saved - eps;
        const long double minus = probe.loss(in, tgt);
        theta = saved;
        const double numeric = static_cast<double>((plus - minus) / (2 * eps));
        worst = std::max(worst, relative_error(view.data[c], numeric));
      }
      coordinates += coords.size();
      min_per_tensor = std::min(min_per_tensor, coords.size());
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-4 && elapsed < 10.0,
          fmt::format("V={} H={} eps=1e-5, {} coordinates over 3 instances (100 per tensor or the "
                      "whole tensor, smallest {}), max relative error {:.3e}, {:.2f} s",
                      v, h, coordinates, min_per_tensor, worst, elapsed)};
}

Outcome numeric_oracles() {
  const auto start = Clock::now();
  const int cases = 100;
  double gru_err = 0.0, att_err = 0.0, dec_err = 0.0, bleu_err = 0.0;
  std::mt19937_64 rng(21);
  for (int c = 0; c < cases; ++c) {
    const Eigen::Index h = 1 + c % 8, in = 1 + (c * 3) % 7;
    Matrix w = oracle::random_matrix(rng, 3 * h, in), u = oracle::random_matrix(rng, 3 * h, h);
    Vector b = oracle::random_vector(rng, 3 * h), x = oracle::random_vector(rng, in),
           h0 = oracle::random_vector(rng, h);
    Vector got = gru_cell(x, h0, {w, u, b});
    oracle::Vec a = oracle::affine(oracle::to_mat(w), oracle::to_vec(x), oracle::to_vec(b));
    gru_err = std::max(gru_err, max_abs_diff(got, oracle::gru(a, oracle::to_vec(h0), oracle::to_mat(u))));
  }
  for (int c = 0; c < cases; ++c) {
    const std::size_t h = 1 + c % 8, len = 1 + (c * 7) % 11;
    ModelParams p = init_params(6, h, 500 + c);
    p.att_w = oracle::random_matrix(rng, h, h);
    p.att_u = oracle::random_matrix(rng, h, h);
    p.att_v = oracle::random_vector(rng, h, 2.0);
    Matrix enc = oracle::random_matrix(rng, len, h);
    Vector s = oracle::random_vector(rng, h);
    AttentionResult got = attention(s, enc, p);
    oracle::Attention want = oracle::attention(oracle::to_vec(s), oracle::to_mat(enc),
                                               oracle::to_mat(p.att_w), oracle::to_mat(p.att_u),
                                               oracle::to_vec(p.att_v));
    att_err = std::max({att_err, max_abs_diff(got.alphas, want.alphas),
                        max_abs_diff(got.context, want.context)});
  }
  for (int c = 0; c < cases; ++c) {
    const std::size_t v = 5 + c % 9, h = 1 + c % 8;
    ModelParams p = scaled_params(v, h, 700 + c, 0.8);
    auto input = random_tokens(rng, 1 + c % 9, v);
    Encoding enc = encode(p, input);
    oracle::Model m(p);
    oracle::Mat enc_o = m.encode({input.begin(), input.end()});
    const TokenId y_prev = c % 3 == 0 ? kSos : random_tokens(rng, 1, v)[0];
    Vector s = c % 2 ? enc.final_hidden : oracle::random_vector(rng, h);
    DecodeResult got = decode_step(p, y_prev, s, enc.outputs);
    auto want = m.decode(y_prev, oracle::to_vec(s), enc_o);
    dec_err = std::max({dec_err, max_abs_diff(got.state, want.state),
                        max_abs_diff(got.probs, want.probs), max_abs_diff(got.alphas, want.alphas)});
  }
  std::uniform_int_distribution<TokenId> tok(3, 9);
  std::uniform_int_distribution<std::size_t> len(0, 15);
  for (int c = 0; c < cases; ++c) {
    std::vector<TokenId> pred(len(rng)), ref(1 + len(rng));
    for (auto& t : pred) t = tok(rng);
    for (auto& t : ref) t = tok(rng);
    for (bool bp : {true, false}) {
      const double got = bleu1(pred, ref, {.brevity_penalty = bp});
      const double want = oracle::bleu1({pred.begin(), pred.end()}, {ref.begin(), ref.end()}, bp);
      bleu_err = std::max(bleu_err, std::abs(got - want));
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = gru_err <= 1e-12 && att_err <= 1e-12 && dec_err <= 1e-12 && bleu_err <= 1e-12 &&
                  elapsed < 10.0;
  return {ok, fmt::format("{} cases each, max abs error: gru {:.1e}, attention {:.1e}, decode step "
                          "{:.1e}, bleu-1 {:.1e}, {:.2f} s",
                          cases, gru_err, att_err, dec_err, bleu_err, elapsed)};
}

Outcome learning_works() {
  const auto start = Clock::now();
  const TrainResult& r = ten_pair_model();
  const auto& h = r.history.points;
  if (h.size() < 2) return {false, "no loss history"};
  const double ratio = h.back().mean_nll / h.front().mean_nll;

  const SequencePair& pair = desk_corpora().clean.train.front();
  std::vector<SequencePair> one{pair};
  TrainConfig c = make_profile(Profile::kDesk).train;
  c.iterations = 1000;
  c.teacher_forcing = 1.0;
  TrainResult single = train(one, desk_corpora().clean.vocab.size(), c);
  const bool reproduced = predict(single.params, pair.input.tokens, c.max_len).tokens ==
                          pair.target.tokens;
  const double elapsed = seconds_since(start);
  return {ratio < 0.3 && reproduced && elapsed < 120.0,
          fmt::format("10 pairs, vocabulary {}, H {}: logged mean NLL {:.4f} -> {:.4f} (ratio {:.3f}); "
                      "overfit one {}-token target: {}; {:.1f} s",
                      desk_corpora().clean.vocab.size(), c.hidden_size, h.front().mean_nll,
                      h.back().mean_nll, ratio, pair.target.tokens.size(),
                      reproduced ? "exact" : "mismatch", elapsed)};
}

struct DeskRuns {
  std::vector<ExperimentRun> runs;
  GatewayMap gateways;
  double seconds = 0.0;
};

const DeskRuns& desk_runs() {
  static const DeskRuns result = [] {
    DeskRuns d;
    const auto start = Clock::now();
    ExperimentConfig c = make_profile(Profile::kDesk);
    d.gateways = build_topology(c.scenario).gateway_of;
    for (std::uint64_t seed : c.seeds) d.runs.push_back(run_experiment(c, seed));
    d.seconds = seconds_since(start);
    return d;
  }();
  return result;
}

Outcome detection_recall() {
  const DeskRuns& d = desk_runs();
  std::size_t hits = 0, same_gateway = 0;
  std::string flagged;
  for (const auto& run : d.runs) {
    if (run.report.recall.value_or(false)) ++hits;
    std::string pairs;
    for (const auto& p : run.report.flagged_pairs) {
      if (d.gateways.at(p.first) == d.gateways.at(p.second)) ++same_gateway;
      pairs += fmt::format("({},{})", p.first.value, p.second.value);
    }
    for (const ModelEvaluation* e : {&run.report.attack, &run.report.clean}) {
      for (std::size_t i = 0; i < e->set_a.entries.size(); ++i) {
        const NodeTuple& t = e->set_a.entries[i].tuple;
        if (e->classification.labels[i] == Label::kAnomalous &&
            d.gateways.at(t.node) == d.gateways.at(t.predicted_server)) {
          ++same_gateway;
        }
      }
    }
    flagged += fmt::format(" seed {}: {{{}}}", run.seed, pairs);
  }
  const std::size_t need = (2 * d.runs.size() + 2) / 3;
  return {d.runs.size() >= 3 && hits >= need && same_gateway == 0 && d.seconds < 900.0,
          fmt::format("(14,15) flagged in {}/{} seeds (need {}), same-gateway flags {};{}; {:.0f} s",
                      hits, d.runs.size(), need, same_gateway, flagged, d.seconds)};
}

Outcome degradation_direction() {
  const DeskRuns& d = desk_runs();
  double with = 0.0, without = 0.0;
  for (const auto& run : d.runs) {
    std::cout << fmt::format("---- seed {} ----\n", run.seed) << format_detection_report(run.report);
    with += run.report.accuracy_with_attack;
    without += run.report.accuracy_without_attack;
  }
  with /= static_cast<double>(d.runs.size());
  without /= static_cast<double>(d.runs.size());
  const double gap = without - with;
  return {gap >= 1.0,
          fmt::format("mean accuracy without attack {:.2f}, with attack {:.2f}, degradation {:.2f} "
                      "points over {} seeds (need >= 1)",
                      without, with, gap, d.runs.size())};
}

Outcome format_fidelity() {
  ScenarioConfig s = make_profile(Profile::kDesk).scenario;
  s.duration = 6.0;
  TraceLog log = simulate(build_topology(s), 1, s.duration);
  if (log.events.size() < 10000) return {false, "simulated trace is shorter than 10,000 lines"};
  log.events.resize(10000);
  std::ostringstream first;
  write_trace(log, first);
  std::istringstream in(first.str());
  TraceLog reread;
  reread.events = read_trace(in);
  std::ostringstream second;
  write_trace(reread, second);
  const bool trace_ok = reread.events.size() == 10000 && first.str() == second.str();

  const TrainResult& model = ten_pair_model();
  Checkpoint ckpt{desk_corpora().clean.vocab, model.params, std::nullopt};
  std::stringstream buf;
  save_checkpoint(ckpt, buf);
  Checkpoint back = load_checkpoint(buf);
  const auto& test = desk_corpora().clean.test;
  std::size_t same = 0;
  for (const auto& pair : test) {
    Prediction a = predict(model.params, pair.input.tokens, kDefaultMaxLen);
    Prediction b = predict(back.params, pair.input.tokens, kDefaultMaxLen);
    bool equal = a.tokens == b.tokens && a.distributions.size() == b.distributions.size();
    for (std::size_t i = 0; equal && i < a.distributions.size(); ++i) {
      equal = a.distributions[i] == b.distributions[i];
    }
    same += equal;
  }
  const bool ckpt_ok = back.vocab == ckpt.vocab && back.params == model.params && same == test.size();
  return {trace_ok && ckpt_ok,
          fmt::format("10,000-line trace write/parse/write {} ({} bytes); checkpoint reload: "
                      "{}/{} test predictions identical",
                      first.str() == second.str() ? "byte-identical" : "differs", first.str().size(),
                      same, test.size())};
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool run_cli_pipeline(const fs::path& out) {
  fs::remove_all(out);
  for (const char* cmd : {"simulate", "prepare", "train", "evaluate", "detect"}) {
    const std::string line = fmt::format("\"{}\" {} --profile desk --seed 1 --out \"{}\" -q",
                                         adlog_binary, cmd, out.string());
    if (std::system(line.c_str()) != 0) return false;
  }
  return true;
}

Outcome determinism() {
  const auto start = Clock::now();
  if (adlog_binary.empty()) {
    ExperimentConfig c = make_profile(Profile::kDesk);
    ExperimentRun a = run_experiment(c, 1), b = run_experiment(c, 1);
    const bool same = format_detection_report(a.report) == format_detection_report(b.report) &&
                      detection_report_to_json(a.report) == detection_report_to_json(b.report);
    return {same, fmt::format("in-process desk runs, seed 1: reports {}; {:.0f} s",
                              same ? "identical" : "differ", seconds_since(start))};
  }
  const fs::path root = fs::temp_directory_path() / "adlog_acceptance_determinism";
  const fs::path a = root / "a", b = root / "b";
  if (!run_cli_pipeline(a) || !run_cli_pipeline(b)) return {false, "cli pipeline failed"};
  std::vector<std::string> compared;
  bool same = true;
  for (const char* name : {"report.txt", "report.json", "bleu_attack.csv", "bleu_clean.csv",
                           "loss_attack.csv", "loss_clean.csv", "model_attack.ckpt"}) {
    auto x = read_file(a / name), y = read_file(b / name);
    same = same && x && y && *x == *y;
    compared.push_back(name);
  }
  fs::remove_all(root);
  return {same, fmt::format("two desk cli runs (simulate..detect, seed 1): {} byte-identical: {}; "
                            "{:.0f} s",
                            same ? "all" : "NOT all", fmt::join(compared, ", "),
                            seconds_since(start))};
}

Outcome invariants() {
  std::vector<std::string> failures;
  std::mt19937_64 rng(77);

  double softmax_err = 0.0;
  for (int c = 0; c < 200; ++c) {
    const double scale = c % 4 == 0 ? 500.0 : 5.0;
    Vector z = oracle::random_vector(rng, 1 + c % 40, scale);
    Vector p = softmax(z);
    softmax_err = std::max(softmax_err, std::abs(p.sum() - 1.0));
    if (p.minCoeff() < 0.0) failures.push_back("negative softmax entry");
  }
  for (int c = 0; c < 100; ++c) {
    const std::size_t v = 5 + c % 20, h = 1 + c % 8;
    ModelParams p = scaled_params(v, h, 900 + c, 1.0);
    auto input = random_tokens(rng, 1 + c % 12, v);
    Encoding enc = encode(p, input);
    DecodeResult d = decode_step(p, kSos, enc.final_hidden, enc.outputs);
    softmax_err = std::max({softmax_err, std::abs(d.probs.sum() - 1.0), std::abs(d.alphas.sum() - 1.0)});
  }
  if (softmax_err > 1e-12) failures.push_back(fmt::format("softmax sum off by {:.1e}", softmax_err));

  std::uniform_int_distribution<TokenId> tok(3, 12);
  std::uniform_int_distribution<std::size_t> len(1, 30);
  for (int c = 0; c < 300; ++c) {
    std::vector<TokenId> x(len(rng)), y(len(rng));
    for (auto& t : x) t = tok(rng);
    for (auto& t : y) t = tok(rng);
    const double s = bleu1(x, y);
    if (s < 0.0 || s > 100.0) failures.push_back("bleu out of [0, 100]");
    if (bleu1(x, x) != 100.0) failures.push_back("bleu(x, x) != 100");
  }

  const auto& corpora = desk_corpora();
  FieldTupleTokenizer tokenizer;
  std::size_t pairs = 0, chronology = 0, purity = 0;
  for (const Corpus* corpus : {&corpora.clean, &corpora.attack}) {
    for (const auto* split : {&corpus->train, &corpus->test}) {
      for (const auto& pair : *split) {
        ++pairs;
        if (pair.input.span.end > pair.target.span.start) ++chronology;
        if (pair.input.context != pair.target.context) ++purity;
        for (const EventSequence* seq : {&pair.input, &pair.target}) {
          auto tokens = corpus->vocab.decode(seq->tokens);
          for (std::size_t i = 3; i < tokens.size(); i += tokenizer.arity()) {
            if (protocol_context(tokens[i]) != seq->context) ++purity;
          }
        }
      }
    }
  }
  if (chronology) failures.push_back(fmt::format("{} pairs out of time order", chronology));
  if (purity) failures.push_back(fmt::format("{} context purity violations", purity));

  ScenarioConfig s = reference_scenario(true, 4.0);
  s.jitter = 0.0;
  TraceLog log = simulate(build_topology(s), 1, s.duration);
  std::size_t data = 0, hidden = 0;
  for (const auto& e : log.events) {
    if (e.protocol != "udp") continue;
    ++data;
    if (e.src.node == NodeId(14) && e.dst.node == NodeId(15)) ++hidden;
  }
  const double fraction = data ? static_cast<double>(hidden) / static_cast<double>(data) : 0.0;
  if (data == 0 || hidden * 8 != data) {
    failures.push_back(fmt::format("attack fraction {:.6f}", fraction));
  }

  return {failures.empty(),
          fmt::format("softmax max |sum-1| {:.1e}; bleu bounds and identity on 300 cases; "
                      "{} pairs chronological and context-pure: {}; attack fraction {}/{} = {:.4f}%{}",
                      softmax_err, pairs, chronology + purity == 0 ? "yes" : "no", hidden, data,
                      100.0 * fraction,
                      failures.empty() ? "" : fmt::format(" [{}]", fmt::join(failures, "; ")))};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--adlog" && i + 1 < argc) {
      adlog_binary = argv[++i];
    } else {
      only.insert(std::stoi(arg));
    }
  }
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "numeric oracles", numeric_oracles},
      {3, "learning works", learning_works},
      {4, "detection recall", detection_recall},
      {5, "degradation direction", degradation_direction},
      {6, "format fidelity", format_fidelity},
      {7, "determinism", determinism},
      {8, "invariant suite", invariants},
  };
  std::vector<std::string> lines;
  bool all = true;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    all = all && o.pass;
    lines.push_back(fmt::format("{} {}: {}: {}", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail));
    std::cout << lines.back() << std::endl;
  }
  std::cout << "\nSummary\n";
  for (const auto& l : lines) std::cout << l << '\n';
  return all ? 0 : 1;
}
