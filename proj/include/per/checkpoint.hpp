#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "per/network.hpp"

namespace per {

inline constexpr char kCheckpointMagic[4] = {'P', 'E', 'R', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout (all integers u32 little-endian):
///   "PERC" | version | layer count n | n × (rows, cols) | weights as
///   little-endian float32, row-major, layer order.
std::vector<std::uint8_t> encode_checkpoint(const Network& net);
Network decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

/// Rounds every weight to float32, the precision kept on disk.
Network round_to_float(const Network& net);

}  // namespace per
