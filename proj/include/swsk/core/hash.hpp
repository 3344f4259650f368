#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace swsk {

constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : data) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// Incremental form of sha256_hex.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data);
  /// Digest of everything fed so far; the hasher stays usable.
  std::string hex() const;

 private:
  void* ctx_;
};

}  // namespace swsk
