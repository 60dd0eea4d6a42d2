#include "adlog/report.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {
namespace {

std::string tuple_text(const NodeTuple& t) {
  return fmt::format("({},{},{})", t.node.value, t.actual_server.value, t.predicted_server.value);
}

std::string pair_text(const NodePair& p) {
  return fmt::format("({},{})", p.first.value, p.second.value);
}

nlohmann::json evaluation_json(const ModelEvaluation& ev) {
  nlohmann::json set_a = nlohmann::json::array();
  for (std::size_t i = 0; i < ev.set_a.entries.size(); ++i) {
    const ScoredTuple& st = ev.set_a.entries[i];
    set_a.push_back({{"node", st.tuple.node.value},
                     {"actual_server", st.tuple.actual_server.value},
                     {"predicted_server", st.tuple.predicted_server.value},
                     {"probability", st.probability},
                     {"time", st.time},
                     {"label", to_string(ev.classification.labels[i])}});
  }
  nlohmann::json flagged = nlohmann::json::array();
  for (const NodePair& p : ev.classification.flagged_pairs) {
    flagged.push_back({p.first.value, p.second.value});
  }
  return {{"accuracy", ev.bleu.mean},
          {"test_pairs", ev.bleu.scores.size()},
          {"tuples", ev.tuples.tuples.size()},
          {"tuples_skipped", ev.tuples.skipped},
          {"tuples_misaligned", ev.tuples.misaligned},
          {"set_a_shortfall", ev.set_a.shortfall},
          {"set_a", set_a},
          {"flagged_pairs", flagged}};
}

}  // namespace

std::string format_detection_report(const DetectionReport& r) {
  std::string out;
  auto table = [&](const char* title, const ModelEvaluation& ev) {
    out += fmt::format("{}\n", title);
    out += fmt::format("  {:<4} {:<14} {:>12}  {}\n", "rank", "tuple", "probability", "label");
    for (std::size_t i = 0; i < ev.set_a.entries.size(); ++i) {
      const ScoredTuple& st = ev.set_a.entries[i];
      out += fmt::format("  {:<4} {:<14} {:>12.6f}  {}\n", i + 1, tuple_text(st.tuple),
                         st.probability, to_string(ev.classification.labels[i]));
    }
    if (ev.set_a.shortfall) out += "  (fewer tuples than the requested set size)\n";
  };

  out += "Detection report\n";
  out += fmt::format("Size of set A: {}\n\n", std::max(r.attack.set_a.entries.size(),
                                                       r.clean.set_a.entries.size()));
  table("Set A, model trained without attack (node, actual server, predicted server):", r.clean);
  out += '\n';
  table("Set A, model trained with attack (node, actual server, predicted server):", r.attack);
  out += '\n';
  out += fmt::format("Accuracy with collaborative attack:    {:.4f}%  ({} test pairs)\n",
                     r.accuracy_with_attack, r.attack.bleu.scores.size());
  out += fmt::format("Accuracy without collaborative attack: {:.4f}%  ({} test pairs)\n",
                     r.accuracy_without_attack, r.clean.bleu.scores.size());
  out += fmt::format("Degradation: {:.4f} percentage points\n", r.degradation);
  out += "Flagged collaborating pairs:";
  if (r.flagged_pairs.empty()) out += " none";
  for (const NodePair& p : r.flagged_pairs) out += ' ' + pair_text(p);
  out += '\n';
  if (r.ground_truth) {
    out += fmt::format("Ground truth pair: {}  recall: {}\n", pair_text(*r.ground_truth),
                       r.recall.value_or(false) ? "yes" : "no");
  }
  return out;
}

nlohmann::json detection_report_to_json(const DetectionReport& r) {
  nlohmann::json flagged = nlohmann::json::array();
  for (const NodePair& p : r.flagged_pairs) flagged.push_back({p.first.value, p.second.value});
  nlohmann::json j{{"accuracy_with_attack", r.accuracy_with_attack},
                   {"accuracy_without_attack", r.accuracy_without_attack},
                   {"degradation", r.degradation},
                   {"flagged_pairs", flagged},
                   {"attack_model", evaluation_json(r.attack)},
                   {"clean_model", evaluation_json(r.clean)}};
  if (r.ground_truth) {
    j["ground_truth"] = {r.ground_truth->first.value, r.ground_truth->second.value};
    j["recall"] = r.recall.value_or(false);
  }
  return j;
}

void write_bleu_csv(const BleuReport& report, std::ostream& out) {
  out << "pair,bleu\n";
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    out << fmt::format("{},{}\n", i, report.scores[i]);
  }
}

void write_loss_csv(const LossHistory& history, std::ostream& out) {
  out << "iteration,mean_nll\n";
  for (const LossPoint& p : history.points) out << fmt::format("{},{}\n", p.iteration, p.mean_nll);
}

void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer, bool binary) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", tmp.string()));
    try {
      writer(out);
      out.flush();
      if (!out) throw Error(fmt::format("write to '{}' failed", tmp.string()));
    } catch (...) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace adlog
