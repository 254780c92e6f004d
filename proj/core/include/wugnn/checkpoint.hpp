#pragma once

// Binary checkpoint layout, all integers little-endian:
//
//   magic            8 bytes  "WUGNNCKP"
//   format_version   u32
//   metadata_length  u64, followed by that many bytes of UTF-8 JSON
//   param_count      u64
//   per parameter (name order):
//     name_length u32, name bytes
//     rank u32, dims u64 x rank
//     values f64 x product(dims), IEEE-754 binary64 little-endian

#include <cstdint>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "wugnn/mlp.hpp"

namespace wugnn::diff {

inline constexpr char kCheckpointMagic[8] = {'W', 'U', 'G', 'N', 'N', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  ModelParams params;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
/// Loaded parameters have requires_grad set.
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wugnn::diff
