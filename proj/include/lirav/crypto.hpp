#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "lirav/bytes.hpp"

// Thin bindings over libsodium for the fixed suite: Ed25519 signatures,
// X25519 key agreement, XSalsa20-Poly1305 authenticated encryption.

namespace lirav {

using VerifyKey = ByteArray<32>;
using Signature = ByteArray<64>;
using PublicPoint = ByteArray<32>;
using AeNonce = ByteArray<24>;

using SigningSeed = Secret<32>;
using ScalarSecret = Secret<32>;
using SharedSecret = Secret<32>;

inline constexpr std::size_t kSignatureSize = 64;
inline constexpr std::size_t kAeTagSize = 16;

VerifyKey ed25519_public_from_seed(const SigningSeed& seed);
Signature ed25519_sign(const SigningSeed& seed, ByteView message);
bool ed25519_verify(const VerifyKey& key, ByteView message, const Signature& signature) noexcept;

PublicPoint x25519_public(const ScalarSecret& scalar);
/// Returns nullopt when the result is the all-zero point (low-order input).
std::optional<SharedSecret> x25519_shared(const ScalarSecret& scalar, const PublicPoint& peer);

Bytes secretbox_seal(const Secret<32>& key, const AeNonce& nonce, ByteView plaintext);
/// Authenticates before decrypting; nullopt on any tag failure.
std::optional<Bytes> secretbox_open(const Secret<32>& key, const AeNonce& nonce, ByteView ciphertext);

/// Source of randomness for nonces and ephemeral scalars.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

/// Reproducible stream keyed by a 32-byte seed. Test and scenario use only.
class DeterministicRandom final : public RandomSource {
 public:
  explicit DeterministicRandom(const ByteArray<32>& seed) : seed_(seed) {}
  void fill(std::span<std::uint8_t> out) override;

 private:
  Secret<32> seed_;
  std::uint64_t counter_ = 0;
};

std::unique_ptr<RandomSource> make_system_random();

}  // namespace lirav
