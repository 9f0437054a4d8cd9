#include "gcal/container.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gcal/error.h"
#include "json.hpp"

namespace gcal {
namespace {

constexpr char kMagic[8] = {'G', 'C', 'A', 'L', 'B', 'I', 'N', '1'};

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::uint32_t Crc32(const std::vector<std::uint8_t>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large payloads.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, bytes.data() + offset, static_cast<uInt>(n));
    offset += n;
  }
  return static_cast<std::uint32_t>(crc);
}

void WriteTextAtomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kMissingFile, "cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  std::filesystem::rename(tmp, path);
}

void WriteContainer(const std::filesystem::path& path, const Container& c) {
  nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(c.manifest_json);
  nlohmann::ordered_json header;
  header["format_version"] = c.format_version;
  header["kind"] = c.kind;
  header["payload_bytes"] = c.payload.size();
  header["payload_crc32"] = Crc32(c.payload);
  for (auto it = manifest.begin(); it != manifest.end(); ++it) {
    header[it.key()] = it.value();
  }
  const std::string header_text = header.dump();

  std::string blob(kMagic, sizeof(kMagic));
  PutU64(blob, header_text.size());
  blob += header_text;
  blob.append(reinterpret_cast<const char*>(c.payload.data()), c.payload.size());
  WriteTextAtomic(path, blob);
}

Container ReadContainer(const std::filesystem::path& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 8) != 0) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": bad magic");
  }
  std::uint64_t header_len = 0;
  for (int i = 0; i < 8; ++i) {
    header_len |= static_cast<std::uint64_t>(blob[8 + i]) << (8 * i);
  }
  if (16 + header_len > blob.size()) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": truncated header");
  }
  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(blob.begin() + 16, blob.begin() + 16 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
  Container c;
  c.kind = header.value("kind", "");
  c.format_version = header.value("format_version", 0);
  if (c.kind != expected_kind) {
    throw Error(ErrorCode::kCorruptFile,
                path.string() + ": expected kind '" + expected_kind + "', found '" + c.kind + "'");
  }
  const std::uint64_t payload_bytes = header.value("payload_bytes", 0ull);
  if (16 + header_len + payload_bytes != blob.size()) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": payload size mismatch");
  }
  c.payload.assign(blob.begin() + 16 + header_len, blob.end());
  if (Crc32(c.payload) != header.value("payload_crc32", 0u)) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": checksum mismatch");
  }
  for (const char* reserved : {"format_version", "kind", "payload_bytes", "payload_crc32"}) {
    header.erase(reserved);
  }
  c.manifest_json = header.dump();
  return c;
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xff);
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back((v >> (8 * i)) & 0xff);
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ByteReader::need(std::size_t n) const {
  if (pos_ + n > bytes_.size()) {
    throw Error(ErrorCode::kCorruptFile, "payload truncated");
  }
}

std::uint8_t ByteReader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
  pos_ += n;
  return s;
}

}  // namespace gcal
