#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lirav::bench {

struct CrtmRow {
  std::uint64_t total_bytes = 0;
  std::uint32_t block_size = 0;
  std::uint64_t blocks = 0;
  /// Bytes of memory read by the CRTM (the work counter).
  std::uint64_t work_bytes = 0;
  double mean_seconds = 0;
  int iterations = 0;
};

/// 1 KiB to 4 MiB, doubling.
std::vector<std::uint64_t> default_sizes();
std::vector<std::uint32_t> default_blocks();

/// Times the chained measurement for every (size, block) pair with
/// block <= size. Configurations are interleaved within each iteration so
/// machine-wide drift affects them evenly; one warm-up round is discarded.
std::vector<CrtmRow> crtm(std::span<const std::uint64_t> sizes, std::span<const std::uint32_t> blocks,
                          int iterations);

struct ProtocolRow {
  std::uint64_t attested_bytes = 0;
  double mean_seconds = 0;
  int iterations = 0;
};

/// Full sessions (both attestations plus key confirmation) between two
/// simulated devices over the in-memory channel.
std::vector<ProtocolRow> protocol(std::span<const std::uint64_t> attested_sizes, int iterations);

enum class Format { Text, Csv };

std::string format(const std::vector<CrtmRow>& rows, Format f);
std::string format(const std::vector<ProtocolRow>& rows, Format f);

}  // namespace lirav::bench
