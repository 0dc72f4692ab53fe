#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lirav {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

std::string to_hex(ByteView bytes);

/// Parses an even-length hex string (either case). Throws Error(ParseError)
/// on odd length or a non-hex character.
Bytes from_hex(std::string_view hex);

/// from_hex with an exact length requirement.
template <std::size_t N>
ByteArray<N> from_hex_exact(std::string_view hex);

/// Comparison whose running time depends only on the lengths.
bool constant_time_equal(ByteView a, ByteView b) noexcept;

/// Zeroes memory in a way the optimizer may not elide.
void secure_wipe(std::span<std::uint8_t> bytes) noexcept;

void append(Bytes& out, ByteView in);
void append_be32(Bytes& out, std::uint32_t v);
void append_be64(Bytes& out, std::uint64_t v);
std::uint32_t load_be32(ByteView in);
std::uint64_t load_be64(ByteView in);

inline ByteView view(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Fixed-size secret buffer, wiped on destruction and on move-from.
/// Deliberately has no stream or hex formatting.
template <std::size_t N>
class Secret {
 public:
  Secret() = default;
  explicit Secret(const ByteArray<N>& bytes) : bytes_(bytes) {}
  Secret(const Secret&) = default;
  Secret& operator=(const Secret&) = default;
  Secret(Secret&& other) noexcept : bytes_(other.bytes_) { other.wipe(); }
  Secret& operator=(Secret&& other) noexcept {
    if (this != &other) {
      bytes_ = other.bytes_;
      other.wipe();
    }
    return *this;
  }
  ~Secret() { wipe(); }

  ByteView bytes() const noexcept { return bytes_; }
  std::span<std::uint8_t> mutable_bytes() noexcept { return bytes_; }
  void wipe() noexcept { secure_wipe(bytes_); }
  bool is_zero() const noexcept {
    std::uint8_t acc = 0;
    for (auto b : bytes_) acc |= b;
    return acc == 0;
  }

  friend bool operator==(const Secret& a, const Secret& b) noexcept {
    return constant_time_equal(a.bytes_, b.bytes_);
  }

 private:
  ByteArray<N> bytes_{};
};

}  // namespace lirav

#include "lirav/error.hpp"

namespace lirav {

template <std::size_t N>
ByteArray<N> from_hex_exact(std::string_view hex) {
  if (hex.size() != 2 * N) {
    throw Error(Errc::ParseError, "expected " + std::to_string(2 * N) +
                                      " hex characters, got " +
                                      std::to_string(hex.size()));
  }
  Bytes raw = from_hex(hex);
  ByteArray<N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

}  // namespace lirav
