#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pie {

using Bytes = std::vector<std::byte>;
using Sha256 = std::array<std::byte, 32>;

inline void put_u8(Bytes& out, uint8_t v) { out.push_back(std::byte{v}); }

inline void put_u32le(Bytes& out, uint32_t v) {
  for (int i = 0; i < 4; i++) out.push_back(std::byte(uint8_t(v >> (8 * i))));
}

inline void put_i64le(Bytes& out, int64_t v) {
  auto u = static_cast<uint64_t>(v);
  for (int i = 0; i < 8; i++) out.push_back(std::byte(uint8_t(u >> (8 * i))));
}

inline void put_str(Bytes& out, std::string_view s) {
  put_u32le(out, static_cast<uint32_t>(s.size()));
  for (char c : s) out.push_back(std::byte(uint8_t(c)));
}

inline void put_bytes(Bytes& out, std::span<const std::byte> b) {
  put_u32le(out, static_cast<uint32_t>(b.size()));
  out.insert(out.end(), b.begin(), b.end());
}

// Bounds-checked sequential reader over a byte span.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

  bool at_end() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }
  size_t position() const { return pos_; }

  bool read_u8(uint8_t& v) {
    if (remaining() < 1) return false;
    v = uint8_t(data_[pos_++]);
    return true;
  }

  bool read_u32le(uint32_t& v) {
    if (remaining() < 4) return false;
    v = 0;
    for (int i = 0; i < 4; i++) v |= uint32_t(uint8_t(data_[pos_++])) << (8 * i);
    return true;
  }

  bool read_i64le(int64_t& v) {
    if (remaining() < 8) return false;
    uint64_t u = 0;
    for (int i = 0; i < 8; i++) u |= uint64_t(uint8_t(data_[pos_++])) << (8 * i);
    v = static_cast<int64_t>(u);
    return true;
  }

  bool read_str(std::string& s) {
    uint32_t n = 0;
    if (!read_u32le(n) || remaining() < n) return false;
    s.assign(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return true;
  }

  bool read_bytes(Bytes& b) {
    uint32_t n = 0;
    if (!read_u32le(n) || remaining() < n) return false;
    b.assign(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return true;
  }

  bool read_raw(std::span<std::byte> dst) {
    if (remaining() < dst.size()) return false;
    std::copy(data_.begin() + pos_, data_.begin() + pos_ + dst.size(), dst.begin());
    pos_ += dst.size();
    return true;
  }

 private:
  std::span<const std::byte> data_;
  size_t pos_ = 0;
};

Sha256 sha256(std::span<const std::byte> data);
Sha256 sha256(std::string_view data);

uint64_t fnv1a64(std::span<const std::byte> data);
uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::span<const std::byte> data);
// First n bytes of the digest as lowercase hex; used for short labels.
std::string short_hex(const Sha256& digest, size_t n = 4);

}  // namespace pie
