#include "lirav/sha3.hpp"

#include <bit>
#include <cstring>

namespace lirav {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// Rotation offsets indexed by lane x + 5y.
constexpr std::array<int, 25> kRho = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                                      25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

// Pi maps lane (x, y) to (y, 2x + 3y).
constexpr int pi_target(int lane) {
  int x = lane % 5;
  int y = lane / 5;
  return y + 5 * ((2 * x + 3 * y) % 5);
}

void keccak_f1600(std::array<std::uint64_t, 25>& a) noexcept {
  for (int round = 0; round < 24; ++round) {
    std::uint64_t c[5];
    std::uint64_t d[5];
    std::uint64_t b[25];
#pragma GCC unroll 5
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
#pragma GCC unroll 5
    for (int x = 0; x < 5; ++x) d[x] = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
#pragma GCC unroll 25
    for (int i = 0; i < 25; ++i) b[pi_target(i)] = std::rotl(a[i] ^ d[i % 5], kRho[i]);
#pragma GCC unroll 25
    for (int i = 0; i < 25; ++i) {
      int x = i % 5;
      int row = i - x;
      a[i] = b[i] ^ (~b[row + (x + 1) % 5] & b[row + (x + 2) % 5]);
    }
    a[0] ^= kRoundConstants[round];
  }
}

static_assert(std::endian::native == std::endian::little,
              "lane loads assume a little-endian host");

}  // namespace

void Sha3_256::reset() noexcept {
  state_.fill(0);
  pos_ = 0;
}

Sha3_256& Sha3_256::update(ByteView data) noexcept {
  auto* lanes = reinterpret_cast<std::uint8_t*>(state_.data());
  const std::uint8_t* p = data.data();
  std::size_t n = data.size();

  while (n > 0 && pos_ != 0) {
    lanes[pos_++] ^= *p++;
    --n;
    if (pos_ == kRate) {
      keccak_f1600(state_);
      pos_ = 0;
    }
  }
  while (n >= kRate) {
    for (std::size_t i = 0; i < kRate / 8; ++i) {
      std::uint64_t w;
      std::memcpy(&w, p + 8 * i, 8);
      state_[i] ^= w;
    }
    keccak_f1600(state_);
    p += kRate;
    n -= kRate;
  }
  while (n > 0) {
    lanes[pos_++] ^= *p++;
    --n;
  }
  return *this;
}

Digest Sha3_256::finish() noexcept {
  auto* lanes = reinterpret_cast<std::uint8_t*>(state_.data());
  lanes[pos_] ^= 0x06;
  lanes[kRate - 1] ^= 0x80;
  keccak_f1600(state_);
  Digest out;
  std::memcpy(out.data(), lanes, out.size());
  reset();
  return out;
}

Digest sha3_256(ByteView data) { return Sha3_256().update(data).finish(); }

Digest sha3_256(std::initializer_list<ByteView> parts) {
  Sha3_256 h;
  for (auto part : parts) h.update(part);
  return h.finish();
}

}  // namespace lirav
