#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmbat {

/// Tensor extents or array lengths disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid or unsupported configuration value.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gram-Schmidt hit a near-zero vector while building a rotation.
class DegenerateRotationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed dataset or checkpoint file. Carries the byte offset at which
/// decoding failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace mmbat
