#pragma once

#include <cstdint>

#include "lirav/memory.hpp"
#include "lirav/sha3.hpp"

namespace lirav {

/// Attested range [start_addr, end_addr) hashed in block_size-byte blocks.
struct AttestationConfig {
  std::uint32_t start_addr = 0;
  std::uint32_t end_addr = 0;
  std::uint32_t block_size = 1024;

  /// Throws InvalidRange when start >= end or block_size == 0.
  void validate() const;
  std::uint32_t length() const noexcept { return end_addr - start_addr; }

  friend bool operator==(const AttestationConfig&, const AttestationConfig&) = default;
};

struct Measurement {
  Digest digest{};
  AttestationConfig config;
};

/// Work counters for one measurement. memory_bytes counts attested bytes
/// absorbed; hash_input_bytes additionally counts the chained digests.
struct MeasureStats {
  std::uint64_t blocks = 0;
  std::uint64_t memory_bytes = 0;
  std::uint64_t hash_input_bytes = 0;
};

/// Chained block hash over the attested range:
///   D_k = H(B_k),  D_j = H(B_j || D_{j+1}),  result D_0.
/// Blocks are consumed last to first with one rolling 32-byte digest. The
/// final block may be short and is not padded. The range must lie inside
/// a single mapped region; no access control applies (ROM context).
Measurement measure(const MemoryImage& image, const AttestationConfig& config,
                    MeasureStats* stats = nullptr);

/// Same recursion over a contiguous buffer that holds exactly the range.
Digest chained_digest(ByteView range, std::uint32_t block_size, MeasureStats* stats = nullptr);

/// Constant-time over digest and config.
bool measurement_equals(const Measurement& a, const Measurement& b) noexcept;

}  // namespace lirav
