#include "adlog/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "adlog/error.hpp"

namespace adlog {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw FormatError("checkpoint truncated");
  }

 private:
  std::uint64_t le(int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw FormatError("checkpoint truncated");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  check_shapes(ckpt.params);
  if (ckpt.vocab.size() != ckpt.params.vocab_size()) {
    throw ModelError("checkpoint vocabulary does not match the output layer");
  }
  Writer w(out);
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.params.hidden_size()));
  w.u32(static_cast<std::uint32_t>(ckpt.vocab.size()));
  for (const auto& t : ckpt.vocab.tokens()) w.str(t);

  w.u32(static_cast<std::uint32_t>(kTensorCount));
  ckpt.params.visit([&](std::string_view name, const auto& t) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rows()));
    w.u32(static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) w.f64(t(r, c));
    }
  });

  w.u8(ckpt.trainer_state ? 1 : 0);
  if (const auto& s = ckpt.trainer_state) {
    w.i64(s->iteration);
    w.i64(s->clip_count);
    w.f64(s->window_sum);
    w.i64(s->window_count);
    w.str(s->rng_state);
    w.u32(static_cast<std::uint32_t>(s->history.points.size()));
    for (const auto& p : s->history.points) {
      w.i64(p.iteration);
      w.f64(p.mean_nll);
    }
  }
  if (!out) throw Error("checkpoint write failed");
}

Checkpoint load_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[sizeof kCheckpointMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError("not an adlog checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("unsupported checkpoint version {}", version));
  }
  const std::uint32_t hidden = r.u32();
  const std::uint32_t n_vocab = r.u32();
  std::vector<std::string> tokens;
  tokens.reserve(n_vocab);
  for (std::uint32_t i = 0; i < n_vocab; ++i) tokens.push_back(r.str());

  Checkpoint ckpt;
  ckpt.vocab = Vocabulary::from_tokens(std::move(tokens));
  ckpt.params = zero_params(n_vocab, hidden);

  if (r.u32() != kTensorCount) throw FormatError("unexpected tensor count");
  ckpt.params.visit([&](std::string_view name, auto& t) {
    const std::string got = r.str();
    if (got != name) {
      throw FormatError(fmt::format("expected tensor '{}', found '{}'", name, got));
    }
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != t.rows() || cols != t.cols()) {
      throw FormatError(fmt::format("tensor '{}' has shape {}x{}, expected {}x{}", name, rows,
                                    cols, t.rows(), t.cols()));
    }
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = r.f64();
    }
  });

  if (r.u8() == 1) {
    TrainerState s;
    s.iteration = r.i64();
    s.clip_count = r.i64();
    s.window_sum = r.f64();
    s.window_count = r.i64();
    s.rng_state = r.str();
    const std::uint32_t n = r.u32();
    s.history.points.resize(n);
    for (auto& p : s.history.points) {
      p.iteration = r.i64();
      p.mean_nll = r.f64();
    }
    ckpt.trainer_state = std::move(s);
  }
  return ckpt;
}

void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write checkpoint '{}'", path));
  save_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open checkpoint '{}'", path));
  return load_checkpoint(in);
}

}  // namespace adlog
