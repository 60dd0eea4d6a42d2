#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "adlog/sequences.hpp"
#include "adlog/vocabulary.hpp"

namespace adlog {

// Prepared training material: a vocabulary and indexed (input, target) pairs
// already split into train and test.
struct Corpus {
  Vocabulary vocab;
  std::vector<SequencePair> train;
  std::vector<SequencePair> test;

  std::size_t pair_count() const { return train.size() + test.size(); }
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

inline constexpr int kCorpusFormatVersion = 1;

// Line-oriented text format:
//   adlog-corpus 1
//   vocab <N>
//   <token>                                      (N lines, index order)
//   pairs <M>
//   <train|test> <context> <in.start> <in.end> <tgt.start> <tgt.end> <n_in> <ids...> <n_tgt> <ids...>
void write_corpus(const Corpus& corpus, std::ostream& out);
Corpus read_corpus(std::istream& in);

}  // namespace adlog
