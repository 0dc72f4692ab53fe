#include "lirav/crypto.hpp"

#include <sodium.h>

#include <stdexcept>

#include "lirav/sha3.hpp"

namespace lirav {

namespace {

void ensure_sodium() {
  static const int status = sodium_init();
  if (status < 0) throw std::runtime_error("libsodium initialisation failed");
}

static_assert(crypto_sign_SEEDBYTES == 32);
static_assert(crypto_sign_BYTES == 64);
static_assert(crypto_scalarmult_BYTES == 32);
static_assert(crypto_secretbox_NONCEBYTES == 24);
static_assert(crypto_secretbox_MACBYTES == kAeTagSize);

}  // namespace

VerifyKey ed25519_public_from_seed(const SigningSeed& seed) {
  ensure_sodium();
  VerifyKey pk{};
  ByteArray<crypto_sign_SECRETKEYBYTES> sk{};
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed.bytes().data());
  secure_wipe(sk);
  return pk;
}

Signature ed25519_sign(const SigningSeed& seed, ByteView message) {
  ensure_sodium();
  VerifyKey pk{};
  ByteArray<crypto_sign_SECRETKEYBYTES> sk{};
  crypto_sign_seed_keypair(pk.data(), sk.data(), seed.bytes().data());
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), sk.data());
  secure_wipe(sk);
  return sig;
}

bool ed25519_verify(const VerifyKey& key, ByteView message, const Signature& signature) noexcept {
  if (sodium_init() < 0) return false;
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), key.data()) == 0;
}

PublicPoint x25519_public(const ScalarSecret& scalar) {
  ensure_sodium();
  PublicPoint q{};
  crypto_scalarmult_base(q.data(), scalar.bytes().data());
  return q;
}

std::optional<SharedSecret> x25519_shared(const ScalarSecret& scalar, const PublicPoint& peer) {
  ensure_sodium();
  SharedSecret out;
  // libsodium itself rejects an all-zero result; check again so the
  // contributory rule does not depend on library version.
  if (crypto_scalarmult(out.mutable_bytes().data(), scalar.bytes().data(), peer.data()) != 0 ||
      out.is_zero()) {
    return std::nullopt;
  }
  return out;
}

Bytes secretbox_seal(const Secret<32>& key, const AeNonce& nonce, ByteView plaintext) {
  ensure_sodium();
  Bytes out(plaintext.size() + kAeTagSize);
  crypto_secretbox_easy(out.data(), plaintext.data(), plaintext.size(), nonce.data(),
                        key.bytes().data());
  return out;
}

std::optional<Bytes> secretbox_open(const Secret<32>& key, const AeNonce& nonce, ByteView ciphertext) {
  ensure_sodium();
  if (ciphertext.size() < kAeTagSize) return std::nullopt;
  Bytes out(ciphertext.size() - kAeTagSize);
  if (crypto_secretbox_open_easy(out.data(), ciphertext.data(), ciphertext.size(), nonce.data(),
                                 key.bytes().data()) != 0) {
    return std::nullopt;
  }
  return out;
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  randombytes_buf(out.data(), out.size());
}

void DeterministicRandom::fill(std::span<std::uint8_t> out) {
  ensure_sodium();
  Bytes counter;
  append_be64(counter, counter_++);
  Secret<32> block_seed(sha3_256({seed_.bytes(), counter}));
  randombytes_buf_deterministic(out.data(), out.size(), block_seed.bytes().data());
}

std::unique_ptr<RandomSource> make_system_random() { return std::make_unique<SystemRandom>(); }

}  // namespace lirav
