#include "adlog/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {

std::vector<std::string> token_stream(std::span<const TraceEvent> events,
                                      const Tokenizer& tokenizer) {
  std::vector<std::string> stream;
  stream.reserve(events.size() * tokenizer.arity());
  for (const TraceEvent& e : events) {
    auto toks = tokenizer.tokenize(e);
    stream.insert(stream.end(), std::make_move_iterator(toks.begin()),
                  std::make_move_iterator(toks.end()));
  }
  return stream;
}

std::vector<EventSequence> segment_sequences(std::span<const TraceEvent> events,
                                             const Tokenizer& tokenizer, const Vocabulary& vocab,
                                             std::size_t max_len) {
  const std::size_t arity = tokenizer.arity();
  if (arity == 0 || max_len < arity) {
    throw ConfigError(fmt::format("max_len {} cannot hold one event of {} tokens", max_len, arity));
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<const TraceEvent*>> by_context;
  for (const TraceEvent& e : events) {
    std::string ctx = protocol_context(e.protocol);
    auto [it, inserted] = by_context.try_emplace(ctx);
    if (inserted) order.push_back(ctx);
    it->second.push_back(&e);
  }

  const std::size_t events_per_sequence = max_len / arity;
  std::vector<EventSequence> out;
  for (const std::string& ctx : order) {
    const auto& members = by_context[ctx];
    for (std::size_t i = 0; i < members.size(); i += events_per_sequence) {
      const std::size_t end = std::min(members.size(), i + events_per_sequence);
      EventSequence seq;
      seq.context = ctx;
      seq.span = {members[i]->time, members[end - 1]->time};
      seq.tokens.reserve((end - i) * arity);
      for (std::size_t k = i; k < end; ++k) {
        for (const auto& tok : tokenizer.tokenize(*members[k])) {
          seq.tokens.push_back(vocab.index_of(tok));
        }
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

std::vector<SequencePair> pair_sequences(std::span<const EventSequence> sequences) {
  std::vector<SequencePair> pairs;
  for (std::size_t i = 0; i + 1 < sequences.size(); ++i) {
    if (sequences[i].context != sequences[i + 1].context) continue;
    pairs.push_back({sequences[i], sequences[i + 1]});
  }
  return pairs;
}

TrainTestSplit split_train_test(std::span<const SequencePair> pairs, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError(fmt::format("test fraction must lie in (0, 1), got {}", test_fraction));
  }
  std::vector<std::size_t> idx(pairs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(pairs.size()) * test_fraction));
  std::vector<bool> is_test(pairs.size(), false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[idx[i]] = true;

  TrainTestSplit split;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (is_test[i] ? split.test : split.train).push_back(pairs[i]);
  }
  return split;
}

}  // namespace adlog
