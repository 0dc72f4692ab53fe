#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include "lirav/crtm.hpp"
#include "lirav/crypto.hpp"
#include "lirav/memory.hpp"
#include "lirav/pmp.hpp"
#include "lirav/trust_store.hpp"

namespace lirav {

struct RegionSpec {
  std::uint32_t base = 0;
  std::uint32_t size = 0;

  std::uint64_t end() const noexcept { return std::uint64_t{base} + size; }
  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

/// Physical memory map of the simulated MCU. The key region holds the
/// X-only signing routine with the embedded quote-signing key; it must sit
/// inside ROM and be a naturally aligned power of two so one NAPOT entry
/// covers it.
struct MemoryLayout {
  RegionSpec rom{0x00001000, 16 * 1024};
  RegionSpec flash{0x20000000, 4 * 1024 * 1024};
  RegionSpec sram{0x80000000, 16 * 1024};
  RegionSpec key_region{0x00004000, 4 * 1024};

  /// Throws InvalidConfig.
  void validate() const;
  friend bool operator==(const MemoryLayout&, const MemoryLayout&) = default;
};

struct DeviceSpec {
  std::string id;
  MemoryLayout layout;
  AttestationConfig attestation;
};

/// Boot ROM behaviour. Clearing lock_key_region models a defective ROM
/// that never installs the X-only entry; it exists for negative tests.
struct BootOptions {
  bool lock_key_region = true;
};

using Nonce = ByteArray<32>;

class RomAccess;

/// A single-core constrained device. Public methods form the surface that
/// untrusted machine-mode firmware can reach: PMP-checked memory access,
/// PMP register writes, and the two ROM entry points. Every public method
/// is serialized on an internal mutex.
class Device {
 public:
  /// PMP entry that boot ROM locks over the key region.
  static constexpr std::size_t kKeyRegionEntry = 0;
  /// Offset of the 32-byte signing seed inside the key region.
  static constexpr std::uint32_t kKeyOffset = 0x40;
  /// Size of the ROM-resident measurement code area at the ROM base.
  static constexpr std::uint32_t kCrtmCodeSize = 0x400;

  Device(DeviceSpec spec, const SigningSeed& qsk, ByteView firmware, const TrustStore& trust,
         BootOptions boot = {}, std::unique_ptr<RandomSource> rng = nullptr);

  Device(const Device&) = delete;
  Device& operator=(const Device&) = delete;

  /// Releases every PMP lock, zeroes SRAM, then runs boot ROM, which
  /// re-installs the locked X-only key entry before returning.
  void reset();

  bool boot_complete() const;
  const std::string& id() const noexcept { return spec_.id; }
  const VerifyKey& verify_key() const noexcept { return verify_key_; }
  const AttestationConfig& attestation_config() const noexcept { return spec_.attestation; }
  const MemoryLayout& layout() const noexcept { return spec_.layout; }
  /// Parsed from the ROM copy at construction; never changes afterwards.
  const TrustStore& trust_store() const noexcept { return trust_; }

  std::uint32_t key_address() const noexcept { return spec_.layout.key_region.base + kKeyOffset; }
  std::uint32_t response_buffer_address() const noexcept { return spec_.layout.sram.base; }
  /// ROM bytes backing the trust store (length-prefixed serialized text).
  RegionSpec trust_store_rom_range() const noexcept { return trust_rom_; }

  // Untrusted machine-mode surface.
  Bytes read(std::uint32_t addr, std::uint32_t len);
  void write(std::uint32_t addr, ByteView data);
  void pmp_configure(std::size_t index, const PmpConfig& config, std::uint32_t addr_reg);
  AccessVerdict pmp_check(Access access, std::uint32_t addr) const;
  PmpEntry pmp_entry(std::size_t index) const;
  std::optional<AddressRange> pmp_match_range(std::size_t index) const;

  /// ROM entry point: runs the CRTM over the configured range, signs the
  /// result inside the X-only gate and leaves the 116-byte quote at the
  /// start of the response buffer.
  void rom_attest();
  /// ROM entry point: signs a 32-byte transcript digest with the
  /// quote-signing key; the 64-byte signature is written right after the
  /// quote in the response buffer.
  void rom_sign_transcript(const Digest& transcript);

  /// Fresh 32-byte nonce; the device keeps an audit log and throws if the
  /// RNG ever repeats one.
  Nonce fresh_nonce();
  ScalarSecret fresh_scalar();
  std::size_t nonces_issued() const;

  /// True when the gate's working buffer holds no key material.
  bool gate_scratch_clear() const;

 private:
  friend class RomAccess;

  Bytes access(Access access, std::uint32_t addr, std::uint32_t len, ExecutionContext ctx,
               ByteView data = {});

  DeviceSpec spec_;
  BootOptions boot_options_;
  MemoryImage memory_;
  PmpBank pmp_;
  VerifyKey verify_key_{};
  RegionSpec trust_rom_{};
  TrustStore trust_;
  bool boot_complete_ = false;
  ByteArray<32> gate_scratch_{};
  std::unique_ptr<RandomSource> rng_;
  std::set<Nonce> nonce_log_;
  mutable std::mutex mutex_;
};

}  // namespace lirav
