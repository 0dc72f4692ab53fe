#include <gtest/gtest.h>

#include <random>

#include "lirav/crtm.hpp"
#include "lirav/error.hpp"
#include "lirav/memory.hpp"
#include "oracle.hpp"

using namespace lirav;

namespace {

constexpr std::uint32_t kBase = 0x20000000;

Bytes random_bytes(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  Bytes b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(rng());
  return b;
}

MemoryImage image_with(const Bytes& flash) {
  MemoryImage img;
  img.add_region({kBase, RegionKind::Flash, flash});
  return img;
}

}  // namespace

TEST(Crtm, TwoBlocksExample) {
  Bytes mem = random_bytes(2048, 1);
  ByteView b0 = ByteView(mem).first(1024);
  ByteView b1 = ByteView(mem).subspan(1024);
  auto want = oracle::sha3({b0, oracle::sha3(b1)});
  Measurement m = measure(image_with(mem), AttestationConfig{kBase, kBase + 2048, 1024});
  EXPECT_EQ(m.digest, want);
  EXPECT_EQ(m.config, (AttestationConfig{kBase, kBase + 2048, 1024}));
}

TEST(Crtm, SingleBlockIsPlainHash) {
  Bytes mem = random_bytes(1024, 2);
  EXPECT_EQ(measure(image_with(mem), {kBase, kBase + 1024, 1024}).digest, oracle::sha3(mem));
}

TEST(Crtm, BlockSizeEntersDigest) {
  Bytes zeros(4096, 0);
  auto img = image_with(zeros);
  EXPECT_NE(measure(img, {kBase, kBase + 4096, 1024}).digest, measure(img, {kBase, kBase + 4096, 4096}).digest);
  EXPECT_EQ(measure(img, {kBase, kBase + 4096, 4096}).digest, oracle::sha3(zeros));
}

// Every size up to 8 KiB for b = 32 B, 1 KiB, 4 KiB, against direct recursion.
TEST(Crtm, MatchesRecursiveOracle) {
  Bytes mem = random_bytes(8192, 3);
  auto img = image_with(mem);
  for (std::uint32_t b : {32u, 1024u, 4096u}) {
    for (std::uint32_t size = 1; size <= 8192; size += (size < 300 ? 1 : 97)) {
      Digest got = measure(img, {kBase, kBase + size, b}).digest;
      ASSERT_EQ(got, oracle::chained_recursive(ByteView(mem).first(size), b)) << size << "/" << b;
    }
    ASSERT_EQ(measure(img, {kBase, kBase + 8192, b}).digest, oracle::chained_recursive(mem, b));
  }
}

TEST(Crtm, OffsetRangeMatchesOracle) {
  Bytes mem = random_bytes(8192, 4);
  auto img = image_with(mem);
  Digest got = measure(img, {kBase + 100, kBase + 5000, 1024}).digest;
  EXPECT_EQ(got, oracle::chained_recursive(ByteView(mem).subspan(100, 4900), 1024));
}

TEST(CrtmProperty, EverySampledBitFlipChangesDigest) {
  Bytes mem = random_bytes(4096, 5);
  const AttestationConfig cfg{kBase, kBase + 4096, 1024};
  const Digest base = measure(image_with(mem), cfg).digest;
  std::mt19937 rng(6);
  for (int i = 0; i < 200; ++i) {
    Bytes flipped = mem;
    const std::size_t bit = rng() % (4096 * 8);
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ASSERT_NE(measure(image_with(flipped), cfg).digest, base) << bit;
  }
}

TEST(CrtmProperty, BytesOutsideRangeDoNotMatter) {
  Bytes mem = random_bytes(8192, 7);
  const AttestationConfig cfg{kBase + 2048, kBase + 6144, 1024};
  const Digest base = measure(image_with(mem), cfg).digest;
  std::mt19937 rng(8);
  for (int i = 0; i < 200; ++i) {
    Bytes changed = mem;
    std::size_t off = rng() % 4096;
    off = off < 2048 ? off : off + 4096;
    changed[off] ^= 0xFF;
    ASSERT_EQ(measure(image_with(changed), cfg).digest, base);
  }
}

TEST(CrtmProperty, WorkCounterIsLinear) {
  Bytes mem = random_bytes(256 * 1024, 9);
  for (std::uint32_t b : {1024u, 2048u, 4096u}) {
    MeasureStats s64, s128, s256;
    chained_digest(ByteView(mem).first(64 * 1024), b, &s64);
    chained_digest(ByteView(mem).first(128 * 1024), b, &s128);
    chained_digest(mem, b, &s256);
    EXPECT_EQ(s64.memory_bytes, 64u * 1024);
    EXPECT_EQ(s128.memory_bytes, 2 * s64.memory_bytes);
    EXPECT_EQ(s256.memory_bytes, 2 * s128.memory_bytes);
    EXPECT_EQ(s128.blocks, 2 * s64.blocks);
    // Including the chained digests the ratio stays within 1%.
    const double r = static_cast<double>(s128.hash_input_bytes) / static_cast<double>(s64.hash_input_bytes);
    EXPECT_NEAR(r, 2.0, 0.02);
  }
}

TEST(Crtm, InvalidRanges) {
  auto img = image_with(Bytes(4096));
  for (AttestationConfig bad : {AttestationConfig{kBase, kBase, 1024}, AttestationConfig{kBase + 10, kBase, 1024},
                                AttestationConfig{kBase, kBase + 16, 0}, AttestationConfig{kBase, kBase + 8192, 1024},
                                AttestationConfig{0x1000, 0x2000, 1024}}) {
    try {
      measure(img, bad);
      ADD_FAILURE() << bad.start_addr << "-" << bad.end_addr;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidRange);
    }
  }
}

TEST(MeasurementEquals, Examples) {
  Measurement a{{}, {kBase, kBase + 1024, 1024}};
  a.digest.fill(0x42);
  Measurement b = a;
  EXPECT_TRUE(measurement_equals(a, b));
  b.config.block_size = 512;
  EXPECT_FALSE(measurement_equals(a, b));
  b = a;
  b.digest[31] ^= 1;
  EXPECT_FALSE(measurement_equals(a, b));
  b = a;
  b.config.end_addr += 1;
  EXPECT_FALSE(measurement_equals(a, b));
}
