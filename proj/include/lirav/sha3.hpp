#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

#include "lirav/bytes.hpp"

namespace lirav {

using Digest = ByteArray<32>;

/// Incremental FIPS-202 SHA3-256. Small and allocation-free so the
/// measurement loop carries no per-block setup cost beyond a 200-byte reset.
class Sha3_256 {
 public:
  static constexpr std::size_t kRate = 136;

  Sha3_256() { reset(); }

  void reset() noexcept;
  Sha3_256& update(ByteView data) noexcept;
  Digest finish() noexcept;

 private:
  std::array<std::uint64_t, 25> state_{};
  std::size_t pos_ = 0;
};

Digest sha3_256(ByteView data);
Digest sha3_256(std::initializer_list<ByteView> parts);

}  // namespace lirav
