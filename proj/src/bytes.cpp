#include "pie/bytes.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace pie {

Sha256 sha256(std::span<const std::byte> data) {
  Sha256 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), reinterpret_cast<unsigned char*>(out.data()), &len,
                 EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("sha256 digest failed");
  }
  return out;
}

Sha256 sha256(std::string_view data) {
  return sha256(std::span<const std::byte>(reinterpret_cast<const std::byte*>(data.data()),
                                           data.size()));
}

uint64_t fnv1a64(std::span<const std::byte> data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (std::byte b : data) {
    h ^= uint64_t(uint8_t(b));
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t fnv1a64(std::string_view data) {
  return fnv1a64(std::span<const std::byte>(reinterpret_cast<const std::byte*>(data.data()),
                                            data.size()));
}

std::string to_hex(std::span<const std::byte> data) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (std::byte b : data) {
    s.push_back(digits[uint8_t(b) >> 4]);
    s.push_back(digits[uint8_t(b) & 0xf]);
  }
  return s;
}

std::string short_hex(const Sha256& digest, size_t n) {
  return to_hex(std::span<const std::byte>(digest.data(), n));
}

}  // namespace pie
