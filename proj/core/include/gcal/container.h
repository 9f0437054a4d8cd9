#ifndef GCAL_CONTAINER_H_
#define GCAL_CONTAINER_H_

// Binary container shared by checkpoints, graph caches and embedding exports:
//
//   "GCALBIN1"                      8-byte magic
//   uint64 little-endian            header length in bytes
//   header                          UTF-8 JSON manifest
//   payload                         raw bytes
//
// The manifest always carries "format_version", "kind", "payload_bytes" and
// "payload_crc32"; callers add their own keys.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gcal {

struct Container {
  std::string kind;
  int format_version = 1;
  // Caller-defined JSON object serialized as text (without the reserved keys).
  std::string manifest_json = "{}";
  std::vector<std::uint8_t> payload;
};

// Writes atomically (temporary file + rename).
void WriteContainer(const std::filesystem::path& path, const Container& c);
// Throws Error(kMissingFile) or Error(kCorruptFile) on checksum/format errors.
Container ReadContainer(const std::filesystem::path& path, const std::string& expected_kind);

// Atomic text write used by the report writers.
void WriteTextAtomic(const std::filesystem::path& path, const std::string& content);

std::uint32_t Crc32(const std::vector<std::uint8_t>& bytes);

// Little-endian primitive codec for payloads.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void str(const std::string& s);

  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  std::string str();

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace gcal

#endif  // GCAL_CONTAINER_H_
