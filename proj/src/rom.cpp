#include "lirav/rom.hpp"

#include "rom_access.hpp"

namespace lirav {

void RomAccess::boot(Device& d) {
  if (!d.boot_options_.lock_key_region) return;
  const RegionSpec& key = d.spec_.layout.key_region;
  d.pmp_.configure(Device::kKeyRegionEntry, PmpConfig::execute_only(AddrMode::Napot, true),
                   napot_encode(key.base, key.size));
}

Measurement RomAccess::measure(const Device& d) { return lirav::measure(d.memory_, d.spec_.attestation); }

void RomAccess::assert_gate(const Device& d) {
  if (!d.boot_complete_) throw Error(Errc::GateViolation, "boot has not completed");
  const std::uint32_t key = d.key_address();
  for (std::uint32_t a = key; a < key + 32; ++a) {
    const bool x_only = d.pmp_.check(Access::Execute, a, ExecutionContext::UntrustedM) == AccessVerdict::Allow &&
                        d.pmp_.check(Access::Read, a, ExecutionContext::UntrustedM) == AccessVerdict::Deny;
    if (!x_only) throw Error(Errc::GateViolation, "key region is not execute-only");
  }
}

template <class Fn>
auto RomAccess::with_key(Device& d, Fn&& fn) {
  assert_gate(d);
  struct ScratchGuard {
    std::span<std::uint8_t> scratch;
    ~ScratchGuard() { secure_wipe(scratch); }
  } guard{d.gate_scratch_};

  // The signing routine loads the key as instruction immediates, so the
  // only permission it needs on the key bytes is execute.
  Bytes fetched = d.access(Access::Execute, d.key_address(), 32, ExecutionContext::RomTrusted);
  std::copy(fetched.begin(), fetched.end(), d.gate_scratch_.begin());
  secure_wipe(fetched);
  SigningSeed seed(d.gate_scratch_);
  return fn(seed);
}

Quote RomAccess::sign_quote(Device& d, const Measurement& m) {
  return with_key(d, [&](const SigningSeed& seed) {
    return Quote{m, ed25519_sign(seed, canonical_quote_bytes(m))};
  });
}

Signature RomAccess::sign_transcript(Device& d, const Digest& transcript) {
  return with_key(d, [&](const SigningSeed& seed) { return ed25519_sign(seed, transcript); });
}

void RomAccess::store_response(Device& d, std::uint32_t offset, ByteView bytes) {
  d.access(Access::Write, d.response_buffer_address() + offset, static_cast<std::uint32_t>(bytes.size()),
           ExecutionContext::RomTrusted, bytes);
}

namespace rom {

Measurement measure_device(const Device& device) {
  auto lock = RomAccess::lock(device);
  return RomAccess::measure(device);
}

Quote sign_quote_gated(Device& device, const Measurement& measurement) {
  auto lock = RomAccess::lock(device);
  return RomAccess::sign_quote(device, measurement);
}

Signature sign_transcript_gated(Device& device, const Digest& transcript) {
  auto lock = RomAccess::lock(device);
  return RomAccess::sign_transcript(device, transcript);
}

}  // namespace rom
}  // namespace lirav
