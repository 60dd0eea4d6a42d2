#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "adlog/checkpoint.hpp"
#include "adlog/corpus.hpp"
#include "adlog/error.hpp"
#include "adlog/experiment.hpp"
#include "adlog/report.hpp"
#include "adlog/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string profile;
  bool quiet = false;
};

struct Paths {
  fs::path dir;

  fs::path trace(const std::string& variant) const { return dir / ("trace_" + variant + ".tr"); }
  fs::path ground_truth() const { return dir / "ground_truth.json"; }
  fs::path corpus(const std::string& name) const { return dir / ("corpus_" + name + ".txt"); }
  fs::path model(const std::string& name) const { return dir / ("model_" + name + ".ckpt"); }
  fs::path loss(const std::string& name) const { return dir / ("loss_" + name + ".csv"); }
  fs::path bleu(const std::string& name) const { return dir / ("bleu_" + name + ".csv"); }
  fs::path report_text() const { return dir / "report.txt"; }
  fs::path report_json() const { return dir / "report.json"; }
  fs::path manifest(const std::string& command) const {
    return dir / ("manifest_" + command + ".json");
  }
};

struct Context {
  adlog::ExperimentConfig config;
  std::uint64_t seed = 1;
  Paths paths;
  bool quiet = false;

  void info(const std::string& msg) const {
    if (!quiet) fmt::print(stderr, "{}\n", msg);
  }
};

Context load_context(const Common& c) {
  std::optional<adlog::Profile> profile;
  if (!c.profile.empty()) profile = adlog::profile_from_string(c.profile);
  Context ctx;
  if (c.config_path.empty()) {
    ctx.config = adlog::make_profile(profile.value_or(adlog::Profile::kDesk));
  } else {
    std::ifstream in(c.config_path);
    if (!in) throw adlog::ConfigError(fmt::format("cannot open config '{}'", c.config_path));
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw adlog::ConfigError(fmt::format("{}: {}", c.config_path, e.what()));
    }
    ctx.config = adlog::experiment_from_json(j, profile);
  }
  if (!c.out.empty()) ctx.config.out_dir = c.out;
  ctx.seed = c.seed.value_or(ctx.config.seeds.front());
  ctx.paths.dir = ctx.config.out_dir;
  ctx.quiet = c.quiet;
  std::error_code ec;
  fs::create_directories(ctx.paths.dir, ec);
  if (ec || !fs::is_directory(ctx.paths.dir)) {
    throw adlog::Error(fmt::format("cannot create output directory '{}'", ctx.paths.dir.string()));
  }
  return ctx;
}

void write_json(const fs::path& path, const json& j) {
  adlog::write_file_atomically(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

void write_manifest(const Context& ctx, const std::string& command,
                    const std::vector<fs::path>& artifacts) {
  json files = json::array();
  for (const auto& p : artifacts) files.push_back(p.filename().string());
  write_json(ctx.paths.manifest(command), {{"command", command},
                                           {"version", adlog::kVersion},
                                           {"seed", ctx.seed},
                                           {"config", adlog::experiment_to_json(ctx.config)},
                                           {"artifacts", files}});
}

json ground_truth_json(const adlog::TraceLog& log) {
  json j{{"attack_present", log.attack_present}};
  if (log.ground_truth) {
    j["hidden_pair"] = {log.ground_truth->pair.first.value, log.ground_truth->pair.second.value};
    json redirect = json::object();
    for (const auto& [from, to] : log.ground_truth->redirect) {
      redirect[std::to_string(from.value)] = to.value;
    }
    j["redirect"] = redirect;
  }
  return j;
}

std::optional<adlog::NodePair> read_ground_truth(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  std::ifstream in(path);
  json j;
  try {
    in >> j;
    if (!j.contains("hidden_pair")) return std::nullopt;
    auto p = j.at("hidden_pair").get<std::vector<std::uint32_t>>();
    if (p.size() != 2) throw adlog::FormatError("hidden_pair must have two nodes");
    return adlog::NodePair::of(adlog::NodeId(p[0]), adlog::NodeId(p[1]));
  } catch (const json::exception& e) {
    throw adlog::FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

adlog::Corpus load_corpus(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw adlog::Error(fmt::format("cannot open corpus '{}'", path.string()));
  return adlog::read_corpus(in);
}

void cmd_simulate(const Context& ctx) {
  const auto& scenario = ctx.config.scenario;
  if (scenario.duration <= 0.0) {
    fmt::print(stderr, "warning: duration is {} s, traces will be empty\n", scenario.duration);
  }
  adlog::ScenarioTraces traces = adlog::simulate_scenarios(scenario, ctx.seed);
  const std::vector<fs::path> artifacts{ctx.paths.trace("clean"), ctx.paths.trace("attack"),
                                        ctx.paths.ground_truth()};
  adlog::write_file_atomically(artifacts[0],
                               [&](std::ostream& out) { adlog::write_trace(traces.clean, out); });
  adlog::write_file_atomically(artifacts[1],
                               [&](std::ostream& out) { adlog::write_trace(traces.attack, out); });
  write_json(artifacts[2], ground_truth_json(traces.attack));
  write_manifest(ctx, "simulate", artifacts);
  ctx.info(fmt::format("clean trace: {} events, attack trace: {} events",
                       traces.clean.events.size(), traces.attack.events.size()));
}

std::vector<std::vector<adlog::TraceEvent>> read_traces(const std::vector<std::string>& paths) {
  std::vector<std::vector<adlog::TraceEvent>> out;
  for (const auto& p : paths) {
    try {
      out.push_back(adlog::read_trace_file(p));
    } catch (const adlog::ParseError& e) {
      throw adlog::Error(fmt::format("{}: {}", p, e.what()));
    }
  }
  return out;
}

void cmd_prepare(const Context& ctx, std::vector<std::string> clean_paths,
                 std::vector<std::string> attack_paths) {
  if (clean_paths.empty() && attack_paths.empty()) {
    clean_paths.push_back(ctx.paths.trace("clean").string());
    attack_paths.push_back(ctx.paths.trace("attack").string());
  }
  if (clean_paths.empty()) throw adlog::ConfigError("at least one clean trace is required");
  const auto clean = read_traces(clean_paths);
  const auto attack = read_traces(attack_paths);
  auto corpora = adlog::prepare_corpora(clean, attack, ctx.config.ingest, ctx.seed);

  std::vector<fs::path> artifacts{ctx.paths.corpus("clean")};
  adlog::write_file_atomically(artifacts.back(), [&](std::ostream& out) {
    adlog::write_corpus(corpora.clean, out);
  });
  fmt::print("vocabulary size: {}\n", corpora.clean.vocab.size());
  fmt::print("clean corpus: {} pairs ({} train, {} test)\n", corpora.clean.pair_count(),
             corpora.clean.train.size(), corpora.clean.test.size());
  if (!attack.empty()) {
    artifacts.push_back(ctx.paths.corpus("attack"));
    adlog::write_file_atomically(artifacts.back(), [&](std::ostream& out) {
      adlog::write_corpus(corpora.attack, out);
    });
    fmt::print("attack corpus: {} pairs ({} train, {} test)\n", corpora.attack.pair_count(),
               corpora.attack.train.size(), corpora.attack.test.size());
  }
  write_manifest(ctx, "prepare", artifacts);
}

std::vector<std::string> model_names(const std::vector<std::string>& requested,
                                     const Paths& paths) {
  if (!requested.empty()) return requested;
  std::vector<std::string> names;
  for (const char* n : {"attack", "clean"}) {
    if (fs::exists(paths.corpus(n))) names.emplace_back(n);
  }
  if (names.empty()) {
    throw adlog::Error(fmt::format("no corpus found in '{}' (run prepare first)",
                                   paths.dir.string()));
  }
  return names;
}

void cmd_train(const Context& ctx, const std::vector<std::string>& requested, bool resume,
               std::optional<std::int64_t> iterations, std::optional<std::int64_t> stop_at) {
  adlog::TrainConfig tc = ctx.config.train;
  tc.seed = ctx.seed;
  if (iterations) tc.iterations = *iterations;
  tc.validate();
  const std::int64_t until = std::min(tc.iterations, stop_at.value_or(tc.iterations));
  std::vector<fs::path> artifacts;
  for (const auto& name : model_names(requested, ctx.paths)) {
    adlog::Corpus corpus = load_corpus(ctx.paths.corpus(name));
    if (corpus.train.empty()) throw adlog::TrainingError(fmt::format("corpus '{}' is empty", name));

    std::optional<adlog::Trainer> trainer;
    if (resume) {
      adlog::Checkpoint ckpt = adlog::load_checkpoint_file(ctx.paths.model(name).string());
      if (!ckpt.trainer_state) {
        throw adlog::FormatError(fmt::format("checkpoint '{}' has no trainer state",
                                             ctx.paths.model(name).string()));
      }
      if (ckpt.vocab != corpus.vocab) {
        throw adlog::ModelError(fmt::format("checkpoint vocabulary does not match corpus '{}'",
                                            name));
      }
      trainer.emplace(std::move(ckpt.params), tc, *ckpt.trainer_state);
    } else {
      trainer.emplace(adlog::init_params(corpus.vocab.size(), tc.hidden_size, tc.seed), tc);
    }

    ctx.info(fmt::format("training {} model: {} pairs, vocabulary {}, H {}, iterations {}", name,
                         corpus.train.size(), corpus.vocab.size(), tc.hidden_size,
                         tc.iterations));
    while (trainer->iteration() < until) {
      trainer->run(corpus.train, std::min(until, trainer->iteration() + tc.log_every));
      const auto& points = trainer->history().points;
      if (!points.empty() && points.back().iteration == trainer->iteration()) {
        ctx.info(fmt::format("  [{}] iteration {} mean nll {:.4f} lr {:.6f}", name,
                             points.back().iteration, points.back().mean_nll,
                             adlog::learning_rate_at(tc, trainer->iteration() - 1)));
      }
    }

    adlog::Checkpoint ckpt{corpus.vocab, trainer->params(), trainer->state()};
    artifacts.push_back(ctx.paths.model(name));
    adlog::write_file_atomically(
        artifacts.back(), [&](std::ostream& out) { adlog::save_checkpoint(ckpt, out); }, true);
    artifacts.push_back(ctx.paths.loss(name));
    adlog::write_file_atomically(artifacts.back(), [&](std::ostream& out) {
      adlog::write_loss_csv(trainer->history(), out);
    });
    ctx.info(fmt::format("  [{}] clipped steps: {}", name, trainer->clip_count()));
  }
  write_manifest(ctx, "train", artifacts);
}

void cmd_evaluate(const Context& ctx, const std::vector<std::string>& requested) {
  std::vector<fs::path> artifacts;
  for (const auto& name : model_names(requested, ctx.paths)) {
    adlog::Checkpoint ckpt = adlog::load_checkpoint_file(ctx.paths.model(name).string());
    adlog::Corpus corpus = load_corpus(ctx.paths.corpus(name));
    if (ckpt.vocab != corpus.vocab) {
      throw adlog::ModelError(fmt::format("checkpoint vocabulary does not match corpus '{}'", name));
    }
    if (corpus.test.empty()) throw adlog::Error(fmt::format("corpus '{}' has no test pairs", name));
    auto report = adlog::accuracy(ckpt.params, corpus.test, ctx.config.eval.max_len,
                                  ctx.config.eval.bleu);
    artifacts.push_back(ctx.paths.bleu(name));
    adlog::write_file_atomically(artifacts.back(),
                                 [&](std::ostream& out) { adlog::write_bleu_csv(report, out); });
    fmt::print("{} model: accuracy {:.4f}% over {} test pairs\n", name, report.mean,
               report.scores.size());
  }
  write_manifest(ctx, "evaluate", artifacts);
}

adlog::DetectionReport detect_from_files(const Context& ctx) {
  adlog::Checkpoint attack = adlog::load_checkpoint_file(ctx.paths.model("attack").string());
  adlog::Checkpoint clean = adlog::load_checkpoint_file(ctx.paths.model("clean").string());
  if (attack.vocab != clean.vocab) {
    throw adlog::ModelError("the attack and clean checkpoints use different vocabularies");
  }
  adlog::Corpus attack_corpus = load_corpus(ctx.paths.corpus("attack"));
  adlog::Corpus clean_corpus = load_corpus(ctx.paths.corpus("clean"));
  if (attack_corpus.vocab != attack.vocab || clean_corpus.vocab != clean.vocab) {
    throw adlog::ModelError("checkpoint vocabulary does not match the prepared corpora");
  }
  return adlog::detect_with(ctx.config, attack.params, clean.params, attack.vocab,
                            attack_corpus.test, clean_corpus.test,
                            read_ground_truth(ctx.paths.ground_truth()));
}

void write_report(const Context& ctx, const adlog::DetectionReport& report) {
  const std::string text = adlog::format_detection_report(report);
  adlog::write_file_atomically(ctx.paths.report_text(), [&](std::ostream& out) { out << text; });
  write_json(ctx.paths.report_json(), adlog::detection_report_to_json(report));
  write_manifest(ctx, "detect", {ctx.paths.report_text(), ctx.paths.report_json()});
  fmt::print("{}", text);
}

void cmd_detect(Context ctx, std::optional<std::size_t> k) {
  if (k) ctx.config.eval.k = *k;
  if (ctx.config.eval.k == 0) throw adlog::ConfigError("k must be at least 1");
  write_report(ctx, detect_from_files(ctx));
}

void cmd_run(const Context& base, const std::vector<std::uint64_t>& seeds) {
  json summary = json::array();
  std::size_t hits = 0;
  double with_sum = 0.0, without_sum = 0.0;
  for (std::uint64_t seed : seeds) {
    Context ctx = base;
    ctx.seed = seed;
    ctx.paths.dir = base.paths.dir / fmt::format("seed_{}", seed);
    fs::create_directories(ctx.paths.dir);
    ctx.info(fmt::format("== seed {} ==", seed));
    cmd_simulate(ctx);
    cmd_prepare(ctx, {}, {});
    cmd_train(ctx, {}, false, std::nullopt, std::nullopt);
    auto report = detect_from_files(ctx);
    write_report(ctx, report);
    const bool hit = report.recall.value_or(false);
    hits += hit ? 1 : 0;
    with_sum += report.accuracy_with_attack;
    without_sum += report.accuracy_without_attack;
    summary.push_back({{"seed", seed},
                       {"accuracy_with_attack", report.accuracy_with_attack},
                       {"accuracy_without_attack", report.accuracy_without_attack},
                       {"degradation", report.degradation},
                       {"recall", hit}});
  }
  const double n = static_cast<double>(seeds.size());
  json doc{{"seeds", summary},
           {"mean_accuracy_with_attack", with_sum / n},
           {"mean_accuracy_without_attack", without_sum / n},
           {"mean_degradation", (without_sum - with_sum) / n},
           {"recall_hits", hits}};
  write_json(base.paths.dir / "summary.json", doc);
  fmt::print("\nseeds: {}  recall hits: {}/{}  mean degradation: {:.4f} points\n", seeds.size(),
             hits, seeds.size(), (without_sum - with_sum) / n);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "seed for simulation, split and training");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--profile", c.profile, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  sub->add_flag("-q,--quiet", c.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative-attack detection on network event logs"};
  app.set_version_flag("--version", adlog::kVersion);
  app.require_subcommand(1);

  Common common;
  auto* simulate = app.add_subcommand("simulate", "write clean and attack traces");
  add_common(simulate, common);

  std::vector<std::string> clean_traces, attack_traces;
  auto* prepare = app.add_subcommand("prepare", "tokenize traces into sequence-pair corpora");
  add_common(prepare, common);
  prepare->add_option("--clean-trace", clean_traces, "trace without attack (repeatable)");
  prepare->add_option("--attack-trace", attack_traces, "trace with attack (repeatable)");

  std::vector<std::string> models;
  bool resume = false;
  std::optional<std::int64_t> iterations, stop_at;
  auto* train = app.add_subcommand("train", "train the attack and clean models");
  add_common(train, common);
  train->add_option("--model", models, "attack and/or clean (default: every prepared corpus)")
      ->check(CLI::IsMember({"attack", "clean"}));
  train->add_flag("--resume", resume, "continue from the saved checkpoint");
  train->add_option("--iterations", iterations, "override the configured iteration count")
      ->check(CLI::PositiveNumber);
  train->add_option("--stop-at", stop_at, "save and stop after this iteration (resumable)")
      ->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "BLEU-1 accuracy on the test split");
  add_common(evaluate, common);
  evaluate->add_option("--model", models, "attack and/or clean")
      ->check(CLI::IsMember({"attack", "clean"}));

  std::optional<std::size_t> k;
  auto* detect = app.add_subcommand("detect", "compare the models and flag collaborating pairs");
  add_common(detect, common);
  detect->add_option("-k", k, "size of set A")->check(CLI::PositiveNumber);

  auto* run = app.add_subcommand("run", "every stage for each configured seed");
  add_common(run, common);

  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx = load_context(common);
    if (simulate->parsed()) cmd_simulate(ctx);
    if (prepare->parsed()) cmd_prepare(ctx, clean_traces, attack_traces);
    if (train->parsed()) cmd_train(ctx, models, resume, iterations, stop_at);
    if (evaluate->parsed()) cmd_evaluate(ctx, models);
    if (detect->parsed()) cmd_detect(ctx, k);
    if (run->parsed()) {
      cmd_run(ctx, common.seed ? std::vector<std::uint64_t>{*common.seed} : ctx.config.seeds);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "adlog: error: {}\n", e.what());
    return 1;
  }
  return 0;
}
