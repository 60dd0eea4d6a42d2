#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adlog/corpus.hpp"
#include "adlog/detect.hpp"
#include "adlog/scenario.hpp"
#include "adlog/simulator.hpp"
#include "adlog/tokenizer.hpp"
#include "adlog/trainer.hpp"

namespace adlog {

inline constexpr const char* kVersion = "0.1.0";

enum class Profile { kDesk, kPaper };

Profile profile_from_string(const std::string& name);
std::string to_string(Profile profile);

struct IngestOptions {
  std::size_t max_len = kDefaultMaxLen;
  std::optional<std::int64_t> seq_bucket;
  double test_fraction = 0.1;
};

struct ExperimentConfig {
  Profile profile = Profile::kDesk;
  ScenarioConfig scenario;
  IngestOptions ingest;
  TrainConfig train;
  EvalOptions eval;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir = "out";

  void validate() const;
};

// Desk: 16 nodes, H = 64, 2,000 iterations, lr 0.01 -> 0.001.
// Paper: H = 256, 70,000 iterations, lr 0.01 -> 0.0001.
ExperimentConfig make_profile(Profile profile);

// Overlays the keys present in `j` (sections: scenario, ingest, train, eval,
// seeds, out_dir, profile) on the named profile's defaults.
ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                      std::optional<Profile> profile_override = std::nullopt);
nlohmann::json experiment_to_json(const ExperimentConfig& config);

FieldTupleTokenizer make_tokenizer(const IngestOptions& options);

struct ScenarioTraces {
  TraceLog clean;
  TraceLog attack;
};

// Same seed for both variants, so they differ only where the hidden channel
// redirects deliveries. Throws ConfigError when the scenario has no hidden pair.
ScenarioTraces simulate_scenarios(const ScenarioConfig& scenario, std::uint64_t seed);

// Segments and pairs each trace on its own, concatenates the pairs and
// applies the seeded train/test split.
Corpus build_corpus(std::span<const std::vector<TraceEvent>> traces, const Vocabulary& vocab,
                    const IngestOptions& options, std::uint64_t seed);

struct PreparedCorpora {
  Corpus clean;   // clean traces only
  Corpus attack;  // clean and attack traces combined
};

// One vocabulary is built over every trace (clean first) and shared by both
// corpora, so the two models can be compared token for token.
PreparedCorpora prepare_corpora(std::span<const std::vector<TraceEvent>> clean_traces,
                                std::span<const std::vector<TraceEvent>> attack_traces,
                                const IngestOptions& options, std::uint64_t seed);

struct ExperimentRun {
  std::uint64_t seed = 0;
  PreparedCorpora corpora;
  TrainResult attack_model;
  TrainResult clean_model;
  DetectionReport report;
};

// The whole pipeline for one seed, in memory.
ExperimentRun run_experiment(const ExperimentConfig& config, std::uint64_t seed);

DetectionReport detect_with(const ExperimentConfig& config, const ModelParams& attack_params,
                            const ModelParams& clean_params, const Vocabulary& vocab,
                            std::span<const SequencePair> test_attack,
                            std::span<const SequencePair> test_clean,
                            std::optional<NodePair> ground_truth);

struct SeedSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracy_with_attack;
  std::vector<double> accuracy_without_attack;
  std::vector<bool> recall;
  double min_with = 0.0, max_with = 0.0, mean_with = 0.0;
  double min_without = 0.0, max_without = 0.0, mean_without = 0.0;
  std::size_t recall_hits = 0;
};

SeedSummary summarize(std::span<const ExperimentRun> runs);

}  // namespace adlog
