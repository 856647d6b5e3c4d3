#pragma once

#include <filesystem>

#include "mmbat/radar/types.hpp"

namespace mmbat::radar {

inline constexpr std::uint32_t kDatasetVersion = 1;

/// Little-endian binary container:
///   "MMRD" | version u32 | frame_count u64 | channels u32 | frame_rate f64
///   per frame: point_count u32 | point_count*channels f64 | timestamp f64
///   has_ground_truth u8
///     [n_joints u32 | n_shape u32 | per frame: theta f64[6NJ] beta f64[NB] gamma f64[3] joints f64[3NJ]]
///   has_initial_box u8 [center f64[3]]
/// Trailing bytes are rejected.
std::vector<std::uint8_t> encode_dataset(const RawSequence& seq);
RawSequence decode_dataset(std::vector<std::uint8_t> bytes);

void write_dataset(const RawSequence& seq, const std::filesystem::path& path);
/// Throws FormatError (with byte offset) on bad magic, version mismatch,
/// truncation or invariant violations; never returns a partial sequence.
RawSequence read_dataset(const std::filesystem::path& path);

}  // namespace mmbat::radar
