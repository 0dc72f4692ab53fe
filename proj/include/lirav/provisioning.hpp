#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "lirav/device.hpp"
#include "lirav/trust_store.hpp"

namespace lirav {

/// Device-unique quote-signing key (Ed25519 seed and its public key).
struct QuoteSigningKey {
  SigningSeed secret;
  VerifyKey public_key{};
};

/// Derives a key from at least 32 bytes of caller-supplied entropy; the same
/// entropy always yields the same key. Throws InsufficientEntropy.
QuoteSigningKey gen_identity(ByteView entropy);
QuoteSigningKey gen_identity(RandomSource& rng);

/// Verifier-side golden value: the CRTM over `firmware` loaded at
/// `load_base`. Throws InvalidRange unless the image covers the range.
Measurement compute_expected(ByteView firmware, std::uint32_t load_base, const AttestationConfig& config);

/// Everything needed to instantiate one device. The file form carries the
/// signing seed and must be handled like any private key file.
struct DeviceProfile {
  std::string id;
  SigningSeed qsk;
  MemoryLayout layout;
  AttestationConfig attestation;
  std::filesystem::path firmware;
};

/// Line-based profile format:
///   device <id>
///   qsk <64 hex>
///   rom|flash|sram|key-region <base-hex> <size-decimal>
///   attest <start-hex> <end-hex> <block-decimal>
///   firmware <path>
std::string serialize_profile(const DeviceProfile& profile);
DeviceProfile parse_profile(std::string_view text);
void save_profile(const std::filesystem::path& path, const DeviceProfile& profile);
/// Relative firmware paths resolve against the profile's directory.
DeviceProfile load_profile(const std::filesystem::path& path);

Bytes load_firmware(const std::filesystem::path& path);

/// The record another device needs in its trust store to verify this one.
PeerRecord peer_record(const DeviceProfile& profile, ByteView firmware);

std::unique_ptr<Device> make_device(const DeviceProfile& profile, ByteView firmware, const TrustStore& trust,
                                    BootOptions boot = {}, std::unique_ptr<RandomSource> rng = nullptr);

}  // namespace lirav
