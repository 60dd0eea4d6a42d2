#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "adlog/model.hpp"
#include "adlog/trainer.hpp"
#include "adlog/vocabulary.hpp"

namespace adlog {

// Binary layout, all integers little-endian:
//   magic     8 bytes  "ADLOGCKP"
//   version   u32      (1)
//   hidden    u32
//   vocab     u32 count, then per token: u32 byte length + UTF-8 bytes
//   tensors   u32 count, then per tensor: u32 name length + name,
//             u32 rows, u32 cols, rows*cols f64 in row-major order
//   state     u8 present flag; if 1: i64 iteration, i64 clip_count,
//             f64 window_sum, i64 window_count, u32 length + RNG state text,
//             u32 history count, then (i64 iteration, f64 mean_nll) pairs
struct Checkpoint {
  Vocabulary vocab;
  ModelParams params;
  std::optional<TrainerState> trainer_state;
};

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'L', 'O', 'G', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);

void save_checkpoint_file(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace adlog
