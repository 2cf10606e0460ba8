#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace impgraph {

/// Little-endian primitive writer, independent of host byte order.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(const void* data, std::size_t size);
  void str(const std::string& s);  // u32 length + bytes

 private:
  std::ostream& out_;
};

/// Counterpart of BinaryWriter. Throws kIo on truncated input.
class BinaryReader {
 public:
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void bytes(void* data, std::size_t size);
  std::string str(std::size_t max_len = 1 << 20);
  bool at_end();

 private:
  std::istream& in_;
  std::string what_;
};

}  // namespace impgraph
