#include "adlog/corpus.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {
namespace {

void write_sequence_tokens(std::ostream& out, const EventSequence& s) {
  out << ' ' << s.tokens.size();
  for (TokenId t : s.tokens) out << ' ' << t;
}

void write_pair(std::ostream& out, const char* split, const SequencePair& p) {
  out << split << ' ' << p.input.context
      << fmt::format(" {} {} {} {}", p.input.span.start, p.input.span.end, p.target.span.start,
                     p.target.span.end);
  write_sequence_tokens(out, p.input);
  write_sequence_tokens(out, p.target);
  out << '\n';
}

std::vector<TokenId> read_ids(std::istringstream& ls, std::size_t vocab_size,
                              std::size_t line_no) {
  std::size_t n = 0;
  if (!(ls >> n)) throw FormatError(fmt::format("corpus line {}: missing length", line_no));
  std::vector<TokenId> ids(n);
  for (auto& id : ids) {
    if (!(ls >> id) || id >= vocab_size) {
      throw FormatError(fmt::format("corpus line {}: bad token index", line_no));
    }
  }
  return ids;
}

}  // namespace

void write_corpus(const Corpus& c, std::ostream& out) {
  out << "adlog-corpus " << kCorpusFormatVersion << '\n';
  out << "vocab " << c.vocab.size() << '\n';
  for (const auto& t : c.vocab.tokens()) out << t << '\n';
  out << "pairs " << c.pair_count() << '\n';
  for (const auto& p : c.train) write_pair(out, "train", p);
  for (const auto& p : c.test) write_pair(out, "test", p);
  if (!out) throw Error("corpus write failed");
}

Corpus read_corpus(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw FormatError(fmt::format("corpus truncated after line {}", line_no));
    }
    ++line_no;
    return line;
  };

  {
    std::istringstream hs(next_line());
    std::string magic;
    int version = 0;
    if (!(hs >> magic >> version) || magic != "adlog-corpus") {
      throw FormatError("not an adlog corpus file");
    }
    if (version != kCorpusFormatVersion) {
      throw FormatError(fmt::format("unsupported corpus version {}", version));
    }
  }

  std::size_t n_vocab = 0;
  {
    std::istringstream vs(next_line());
    std::string tag;
    if (!(vs >> tag >> n_vocab) || tag != "vocab") throw FormatError("expected 'vocab <N>'");
  }
  std::vector<std::string> tokens;
  tokens.reserve(n_vocab);
  for (std::size_t i = 0; i < n_vocab; ++i) tokens.push_back(next_line());

  Corpus c;
  c.vocab = Vocabulary::from_tokens(std::move(tokens));

  std::size_t n_pairs = 0;
  {
    std::istringstream ps(next_line());
    std::string tag;
    if (!(ps >> tag >> n_pairs) || tag != "pairs") throw FormatError("expected 'pairs <M>'");
  }
  for (std::size_t i = 0; i < n_pairs; ++i) {
    std::istringstream ls(next_line());
    std::string split;
    SequencePair p;
    if (!(ls >> split >> p.input.context >> p.input.span.start >> p.input.span.end >>
          p.target.span.start >> p.target.span.end)) {
      throw FormatError(fmt::format("corpus line {}: malformed pair header", line_no));
    }
    p.target.context = p.input.context;
    p.input.tokens = read_ids(ls, c.vocab.size(), line_no);
    p.target.tokens = read_ids(ls, c.vocab.size(), line_no);
    if (split == "train") {
      c.train.push_back(std::move(p));
    } else if (split == "test") {
      c.test.push_back(std::move(p));
    } else {
      throw FormatError(fmt::format("corpus line {}: unknown split '{}'", line_no, split));
    }
  }
  return c;
}

}  // namespace adlog
