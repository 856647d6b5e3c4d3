#pragma once

#include <cstdint>
#include <initializer_list>

namespace mmbat::util {

/// SplitMix64 finalizer. Used to derive independent stream seeds from
/// (seed, key...) tuples so that per-step and per-frame randomness can be
/// replayed without carrying generator state around.
std::uint64_t mix64(std::uint64_t x);

/// Folds a list of keys into one 64-bit seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

/// Maps a 64-bit hash to a double in [0, 1).
inline double unit_double(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace mmbat::util
