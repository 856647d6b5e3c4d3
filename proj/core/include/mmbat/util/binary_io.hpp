#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmbat::util {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Appends little-endian encoded values to a byte buffer.
class ByteWriter {
 public:
  void bytes(std::string_view raw);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> values);

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  void write_file(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

/// Reads little-endian values and reports truncation as FormatError with the
/// offset of the failed read.
class ByteReader {
 public:
  explicit ByteReader(std::vector<std::uint8_t> data) : data_(std::move(data)) {}
  static ByteReader from_file(const std::filesystem::path& path);

  std::string bytes(std::size_t n);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);

  std::uint64_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const;

  std::vector<std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace mmbat::util
