#include "adlog/experiment.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {

Profile profile_from_string(const std::string& name) {
  if (name == "desk") return Profile::kDesk;
  if (name == "paper") return Profile::kPaper;
  throw ConfigError(fmt::format("unknown profile '{}' (expected desk or paper)", name));
}

std::string to_string(Profile profile) { return profile == Profile::kDesk ? "desk" : "paper"; }

void ExperimentConfig::validate() const {
  train.validate();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(ingest.test_fraction > 0.0 && ingest.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (eval.k == 0) throw ConfigError("eval.k must be at least 1");
  build_topology(scenario);
}

ExperimentConfig make_profile(Profile profile) {
  ExperimentConfig c;
  c.profile = profile;
  if (profile == Profile::kDesk) {
    c.scenario = reference_scenario(true, 4.0);
    c.train.hidden_size = 64;
    c.train.iterations = 2000;
    c.train.lr_start = 0.01;
    c.train.lr_end = 0.001;
  } else {
    c.scenario = reference_scenario(true, 30.0);
    c.train.hidden_size = 256;
    c.train.iterations = 70000;
    c.train.lr_start = 0.01;
    c.train.lr_end = 0.0001;
  }
  c.train.teacher_forcing = 0.5;
  c.train.max_len = c.ingest.max_len;
  c.eval.max_len = c.ingest.max_len;
  return c;
}

namespace {

LrSchedule schedule_from_string(const std::string& s) {
  if (s == "exponential") return LrSchedule::kExponential;
  if (s == "constant") return LrSchedule::kConstant;
  throw ConfigError(fmt::format("unknown learning-rate schedule '{}'", s));
}

LossReduction reduction_from_string(const std::string& s) {
  if (s == "sum") return LossReduction::kSum;
  if (s == "mean") return LossReduction::kMean;
  throw ConfigError(fmt::format("unknown loss reduction '{}'", s));
}

}  // namespace

ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      std::optional<Profile> profile_override) {
  try {
    Profile profile = profile_override.value_or(
        profile_from_string(j.value("profile", std::string("desk"))));
    ExperimentConfig c = make_profile(profile);
    if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"), c.scenario);
    if (j.contains("ingest")) {
      const auto& ji = j.at("ingest");
      c.ingest.max_len = ji.value("max_len", c.ingest.max_len);
      if (ji.contains("seq_bucket") && !ji.at("seq_bucket").is_null()) {
        c.ingest.seq_bucket = ji.at("seq_bucket").get<std::int64_t>();
      }
      c.ingest.test_fraction = ji.value("test_fraction", c.ingest.test_fraction);
    }
    c.train.max_len = c.ingest.max_len;
    c.eval.max_len = c.ingest.max_len;
    if (j.contains("train")) {
      const auto& jt = j.at("train");
      c.train.hidden_size = jt.value("hidden_size", c.train.hidden_size);
      c.train.iterations = jt.value("iterations", c.train.iterations);
      c.train.lr_start = jt.value("lr_start", c.train.lr_start);
      c.train.lr_end = jt.value("lr_end", c.train.lr_end);
      if (jt.contains("schedule")) {
        c.train.schedule = schedule_from_string(jt.at("schedule").get<std::string>());
      }
      c.train.teacher_forcing = jt.value("teacher_forcing", c.train.teacher_forcing);
      c.train.log_every = jt.value("log_every", c.train.log_every);
      c.train.clip_norm = jt.value("clip_norm", c.train.clip_norm);
      if (jt.contains("loss_reduction")) {
        c.train.reduction = reduction_from_string(jt.at("loss_reduction").get<std::string>());
      }
    }
    if (j.contains("eval")) {
      const auto& je = j.at("eval");
      c.eval.k = je.value("k", c.eval.k);
      c.eval.bleu.brevity_penalty = je.value("brevity_penalty", c.eval.bleu.brevity_penalty);
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.out_dir = j.value("out_dir", c.out_dir);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid experiment config: {}", e.what()));
  }
}

nlohmann::json experiment_to_json(const ExperimentConfig& c) {
  nlohmann::json ingest{{"max_len", c.ingest.max_len}, {"test_fraction", c.ingest.test_fraction}};
  ingest["seq_bucket"] =
      c.ingest.seq_bucket ? nlohmann::json(*c.ingest.seq_bucket) : nlohmann::json(nullptr);
  return {
      {"profile", to_string(c.profile)},
      {"scenario", scenario_to_json(c.scenario)},
      {"ingest", ingest},
      {"train",
       {{"hidden_size", c.train.hidden_size},
        {"iterations", c.train.iterations},
        {"lr_start", c.train.lr_start},
        {"lr_end", c.train.lr_end},
        {"schedule", c.train.schedule == LrSchedule::kConstant ? "constant" : "exponential"},
        {"teacher_forcing", c.train.teacher_forcing},
        {"log_every", c.train.log_every},
        {"clip_norm", c.train.clip_norm},
        {"loss_reduction", c.train.reduction == LossReduction::kMean ? "mean" : "sum"},
        {"optimizer", "SGD"},
        {"hidden_layers", 1}}},
      {"eval", {{"k", c.eval.k}, {"brevity_penalty", c.eval.bleu.brevity_penalty}}},
      {"seeds", c.seeds},
      {"out_dir", c.out_dir},
  };
}

FieldTupleTokenizer make_tokenizer(const IngestOptions& options) {
  return FieldTupleTokenizer(options.seq_bucket);
}

ScenarioTraces simulate_scenarios(const ScenarioConfig& scenario, std::uint64_t seed) {
  if (!scenario.hidden_pair) {
    throw ConfigError("the attack variant needs a hidden_pair in the scenario");
  }
  ScenarioConfig clean = scenario;
  clean.hidden_pair.reset();
  clean.redirect.clear();
  ScenarioTraces out;
  out.clean = simulate(build_topology(clean), seed, scenario.duration);
  out.attack = simulate(build_topology(scenario), seed, scenario.duration);
  return out;
}

Corpus build_corpus(std::span<const std::vector<TraceEvent>> traces, const Vocabulary& vocab,
                    const IngestOptions& options, std::uint64_t seed) {
  FieldTupleTokenizer tokenizer = make_tokenizer(options);
  std::vector<SequencePair> pairs;
  for (const auto& events : traces) {
    auto seqs = segment_sequences(events, tokenizer, vocab, options.max_len);
    auto p = pair_sequences(seqs);
    pairs.insert(pairs.end(), std::make_move_iterator(p.begin()),
                 std::make_move_iterator(p.end()));
  }
  Corpus c;
  c.vocab = vocab;
  if (pairs.empty()) return c;
  auto split = split_train_test(pairs, options.test_fraction, seed);
  c.train = std::move(split.train);
  c.test = std::move(split.test);
  return c;
}

PreparedCorpora prepare_corpora(std::span<const std::vector<TraceEvent>> clean_traces,
                                std::span<const std::vector<TraceEvent>> attack_traces,
                                const IngestOptions& options, std::uint64_t seed) {
  FieldTupleTokenizer tokenizer = make_tokenizer(options);
  Vocabulary vocab;
  for (auto group : {clean_traces, attack_traces}) {
    for (const auto& events : group) {
      for (const auto& tok : token_stream(events, tokenizer)) vocab.add(tok);
    }
  }
  std::vector<std::vector<TraceEvent>> combined(clean_traces.begin(), clean_traces.end());
  combined.insert(combined.end(), attack_traces.begin(), attack_traces.end());

  PreparedCorpora out;
  out.clean = build_corpus(clean_traces, vocab, options, seed);
  out.attack = build_corpus(combined, vocab, options, seed);
  return out;
}

DetectionReport detect_with(const ExperimentConfig& config, const ModelParams& attack_params,
                            const ModelParams& clean_params, const Vocabulary& vocab,
                            std::span<const SequencePair> test_attack,
                            std::span<const SequencePair> test_clean,
                            std::optional<NodePair> ground_truth) {
  FieldTupleTokenizer tokenizer = make_tokenizer(config.ingest);
  Topology topo = build_topology(config.scenario);
  return compare_models({attack_params, vocab}, {clean_params, vocab}, test_attack, test_clean,
                        tokenizer, topo.gateway_of, config.eval, ground_truth);
}

ExperimentRun run_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  ExperimentRun run;
  run.seed = seed;
  ScenarioTraces traces = simulate_scenarios(config.scenario, seed);
  const std::vector<std::vector<TraceEvent>> clean{traces.clean.events};
  const std::vector<std::vector<TraceEvent>> attack{traces.attack.events};
  run.corpora = prepare_corpora(clean, attack, config.ingest, seed);

  TrainConfig tc = config.train;
  tc.seed = seed;
  run.attack_model = train(run.corpora.attack.train, run.corpora.attack.vocab.size(), tc);
  run.clean_model = train(run.corpora.clean.train, run.corpora.clean.vocab.size(), tc);

  std::optional<NodePair> truth;
  if (traces.attack.ground_truth) {
    truth = NodePair::of(traces.attack.ground_truth->pair.first,
                         traces.attack.ground_truth->pair.second);
  }
  run.report = detect_with(config, run.attack_model.params, run.clean_model.params,
                           run.corpora.attack.vocab, run.corpora.attack.test,
                           run.corpora.clean.test, truth);
  return run;
}

SeedSummary summarize(std::span<const ExperimentRun> runs) {
  SeedSummary s;
  if (runs.empty()) return s;
  for (const auto& r : runs) {
    s.seeds.push_back(r.seed);
    s.accuracy_with_attack.push_back(r.report.accuracy_with_attack);
    s.accuracy_without_attack.push_back(r.report.accuracy_without_attack);
    const bool hit = r.report.recall.value_or(false);
    s.recall.push_back(hit);
    if (hit) ++s.recall_hits;
  }
  auto stats = [](const std::vector<double>& v, double& lo, double& hi, double& mean) {
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  stats(s.accuracy_with_attack, s.min_with, s.max_with, s.mean_with);
  stats(s.accuracy_without_attack, s.min_without, s.max_without, s.mean_without);
  return s;
}

}  // namespace adlog
