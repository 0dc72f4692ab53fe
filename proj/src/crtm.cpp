#include "lirav/crtm.hpp"

#include "lirav/error.hpp"

namespace lirav {

void AttestationConfig::validate() const {
  if (start_addr >= end_addr) throw Error(Errc::InvalidRange, "attested range is empty");
  if (block_size == 0) throw Error(Errc::InvalidRange, "block size must be at least one byte");
}

Digest chained_digest(ByteView range, std::uint32_t block_size, MeasureStats* stats) {
  if (range.empty() || block_size == 0) throw Error(Errc::InvalidRange, "empty range or block size");

  const std::size_t blocks = (range.size() + block_size - 1) / block_size;
  const std::size_t last_offset = (blocks - 1) * std::size_t{block_size};

  Sha3_256 h;
  Digest rolling = h.update(range.subspan(last_offset)).finish();
  for (std::size_t j = blocks - 1; j-- > 0;) {
    h.update(range.subspan(j * block_size, block_size));
    h.update(rolling);
    rolling = h.finish();
  }

  if (stats) {
    stats->blocks += blocks;
    stats->memory_bytes += range.size();
    stats->hash_input_bytes += range.size() + (blocks - 1) * rolling.size();
  }
  return rolling;
}

Measurement measure(const MemoryImage& image, const AttestationConfig& config, MeasureStats* stats) {
  config.validate();
  const MemoryRegion* region = image.find(config.start_addr, config.length());
  if (!region) throw Error(Errc::InvalidRange, "attested range is not inside one mapped region");
  ByteView range = ByteView(region->bytes).subspan(config.start_addr - region->base, config.length());
  return Measurement{chained_digest(range, config.block_size, stats), config};
}

namespace {

ByteArray<12> config_bytes(const AttestationConfig& c) noexcept {
  ByteArray<12> out{};
  const std::uint32_t words[3] = {c.start_addr, c.end_addr, c.block_size};
  for (std::size_t w = 0; w < 3; ++w) {
    for (std::size_t i = 0; i < 4; ++i) out[4 * w + i] = static_cast<std::uint8_t>(words[w] >> (24 - 8 * i));
  }
  return out;
}

}  // namespace

bool measurement_equals(const Measurement& a, const Measurement& b) noexcept {
  const bool digest_eq = constant_time_equal(a.digest, b.digest);
  const bool config_eq = constant_time_equal(config_bytes(a.config), config_bytes(b.config));
  return digest_eq & config_eq;
}

}  // namespace lirav
