#include "lirav/device.hpp"

#include <algorithm>
#include <bit>

#include "lirav/sha3.hpp"
#include "rom_access.hpp"

namespace lirav {

namespace {

constexpr std::uint32_t kMinSramSize = 256;  // response buffer: quote + transcript signature

void require_region(const RegionSpec& r, const char* name) {
  if (r.size == 0) throw Error(Errc::InvalidConfig, std::string(name) + " region is empty");
  if (r.end() > (std::uint64_t{1} << 32)) {
    throw Error(Errc::InvalidConfig, std::string(name) + " region exceeds the address space");
  }
}

bool overlaps(const RegionSpec& a, const RegionSpec& b) { return a.base < b.end() && b.base < a.end(); }

// Stand-in for the measurement code burned into ROM. The bytes only need
// to be fixed per build so ROM contents are reproducible.
Bytes crtm_code_image() {
  Bytes code;
  code.reserve(Device::kCrtmCodeSize);
  Digest block = sha3_256(view(std::string("lirav crtm rom image")));
  while (code.size() < Device::kCrtmCodeSize) {
    append(code, block);
    block = sha3_256(block);
  }
  code.resize(Device::kCrtmCodeSize);
  return code;
}

}  // namespace

void MemoryLayout::validate() const {
  require_region(rom, "rom");
  require_region(flash, "flash");
  require_region(sram, "sram");
  if (overlaps(rom, flash) || overlaps(rom, sram) || overlaps(flash, sram)) {
    throw Error(Errc::InvalidConfig, "memory regions overlap");
  }
  if (sram.size < kMinSramSize) throw Error(Errc::InvalidConfig, "sram smaller than the response buffer");
  const auto& k = key_region;
  if (k.size < 128 || !std::has_single_bit(k.size) || (k.base & (k.size - 1)) != 0) {
    throw Error(Errc::InvalidConfig, "key region must be a naturally aligned power of two >= 128 bytes");
  }
  if (k.base < rom.base || k.end() > rom.end()) {
    throw Error(Errc::InvalidConfig, "key region must lie inside rom");
  }
  if (k.base < rom.base + Device::kCrtmCodeSize) {
    throw Error(Errc::InvalidConfig, "key region overlaps the measurement code area");
  }
}

Device::Device(DeviceSpec spec, const SigningSeed& qsk, ByteView firmware, const TrustStore& trust,
               BootOptions boot, std::unique_ptr<RandomSource> rng)
    : spec_(std::move(spec)), boot_options_(boot), rng_(std::move(rng)) {
  if (spec_.id.empty() || spec_.id.size() > kMaxDeviceIdLength) {
    throw Error(Errc::InvalidConfig, "device id must be 1-64 bytes");
  }
  spec_.layout.validate();
  spec_.attestation.validate();
  const MemoryLayout& lay = spec_.layout;
  if (firmware.size() > lay.flash.size) throw Error(Errc::InvalidConfig, "firmware larger than flash");
  if (!rng_) rng_ = make_system_random();

  // ROM: measurement code, then the trust store in whichever free span
  // around the key region is larger, and the key region itself.
  Bytes rom(lay.rom.size, 0);
  Bytes code = crtm_code_image();
  std::copy(code.begin(), code.end(), rom.begin());

  const std::uint32_t key_off = lay.key_region.base - lay.rom.base;
  for (std::uint32_t i = 0; i + 4 <= lay.key_region.size; i += 4) {
    // addi x0, x0, 0 (nop) filler around the embedded key
    rom[key_off + i] = 0x13;
  }
  std::copy(qsk.bytes().begin(), qsk.bytes().end(), rom.begin() + key_off + kKeyOffset);

  const RegionSpec before{lay.rom.base + kCrtmCodeSize, lay.key_region.base - (lay.rom.base + kCrtmCodeSize)};
  const RegionSpec after{static_cast<std::uint32_t>(lay.key_region.end()),
                         static_cast<std::uint32_t>(lay.rom.end() - lay.key_region.end())};
  trust_rom_ = before.size >= after.size ? before : after;

  const std::string text = serialize_trust_store(trust);
  Bytes blob;
  append_be32(blob, static_cast<std::uint32_t>(text.size()));
  append(blob, view(text));
  if (blob.size() > trust_rom_.size) throw Error(Errc::InvalidConfig, "trust store does not fit in rom");
  std::copy(blob.begin(), blob.end(), rom.begin() + (trust_rom_.base - lay.rom.base));
  trust_rom_.size = static_cast<std::uint32_t>(blob.size());

  Bytes flash(lay.flash.size, 0);
  std::copy(firmware.begin(), firmware.end(), flash.begin());

  memory_.add_region(MemoryRegion{lay.rom.base, RegionKind::Rom, std::move(rom)});
  memory_.add_region(MemoryRegion{lay.flash.base, RegionKind::Flash, std::move(flash)});
  memory_.add_region(MemoryRegion{lay.sram.base, RegionKind::Sram, Bytes(lay.sram.size, 0)});

  if (!memory_.find(spec_.attestation.start_addr, spec_.attestation.length())) {
    throw Error(Errc::InvalidRange, "attested range is not inside one mapped region");
  }

  verify_key_ = ed25519_public_from_seed(qsk);

  // The live store is whatever ROM holds.
  ByteView stored = memory_.span(trust_rom_.base, trust_rom_.size);
  const std::uint32_t len = load_be32(stored.first(4));
  const auto* text_begin = reinterpret_cast<const char*>(stored.data() + 4);
  trust_ = parse_trust_store(std::string_view(text_begin, len));

  reset();
}

void Device::reset() {
  std::lock_guard lock(mutex_);
  boot_complete_ = false;
  pmp_.reset();
  memory_.zero(RegionKind::Sram);
  secure_wipe(gate_scratch_);
  RomAccess::boot(*this);
  boot_complete_ = true;
}

bool Device::boot_complete() const {
  std::lock_guard lock(mutex_);
  return boot_complete_;
}

Bytes Device::access(Access kind, std::uint32_t addr, std::uint32_t len, ExecutionContext ctx,
                     ByteView data) {
  MemoryRegion* region = memory_.find(addr, len);
  if (!region) throw Error(Errc::OutOfRange, "address range not mapped");
  for (std::uint64_t a = addr; a < std::uint64_t{addr} + len; ++a) {
    if (kind == Access::Write && region->kind == RegionKind::Rom) {
      throw Error::access_fault(static_cast<std::uint32_t>(a));
    }
    if (pmp_.check(kind, a, ctx) == AccessVerdict::Deny) throw Error::access_fault(static_cast<std::uint32_t>(a));
  }
  auto bytes = std::span<std::uint8_t>(region->bytes).subspan(addr - region->base, len);
  if (kind == Access::Write) {
    std::copy(data.begin(), data.end(), bytes.begin());
    return {};
  }
  return Bytes(bytes.begin(), bytes.end());
}

Bytes Device::read(std::uint32_t addr, std::uint32_t len) {
  std::lock_guard lock(mutex_);
  return access(Access::Read, addr, len, ExecutionContext::UntrustedM);
}

void Device::write(std::uint32_t addr, ByteView data) {
  std::lock_guard lock(mutex_);
  access(Access::Write, addr, static_cast<std::uint32_t>(data.size()), ExecutionContext::UntrustedM, data);
}

void Device::pmp_configure(std::size_t index, const PmpConfig& config, std::uint32_t addr_reg) {
  std::lock_guard lock(mutex_);
  pmp_.configure(index, config, addr_reg);
}

AccessVerdict Device::pmp_check(Access access, std::uint32_t addr) const {
  std::lock_guard lock(mutex_);
  return pmp_.check(access, addr, ExecutionContext::UntrustedM);
}

PmpEntry Device::pmp_entry(std::size_t index) const {
  std::lock_guard lock(mutex_);
  return pmp_.entry(index);
}

std::optional<AddressRange> Device::pmp_match_range(std::size_t index) const {
  std::lock_guard lock(mutex_);
  return pmp_.match_range(index);
}

void Device::rom_attest() {
  std::lock_guard lock(mutex_);
  Measurement m = RomAccess::measure(*this);
  Quote q = RomAccess::sign_quote(*this, m);
  RomAccess::store_response(*this, 0, q.to_wire());
}

void Device::rom_sign_transcript(const Digest& transcript) {
  std::lock_guard lock(mutex_);
  Signature sig = RomAccess::sign_transcript(*this, transcript);
  RomAccess::store_response(*this, static_cast<std::uint32_t>(kQuoteWireSize), sig);
}

Nonce Device::fresh_nonce() {
  std::lock_guard lock(mutex_);
  Nonce n{};
  rng_->fill(n);
  if (!nonce_log_.insert(n).second) throw Error(Errc::InvalidConfig, "random source repeated a nonce");
  return n;
}

ScalarSecret Device::fresh_scalar() {
  std::lock_guard lock(mutex_);
  ScalarSecret s;
  rng_->fill(s.mutable_bytes());
  return s;
}

std::size_t Device::nonces_issued() const {
  std::lock_guard lock(mutex_);
  return nonce_log_.size();
}

bool Device::gate_scratch_clear() const {
  std::lock_guard lock(mutex_);
  return std::all_of(gate_scratch_.begin(), gate_scratch_.end(), [](std::uint8_t b) { return b == 0; });
}

}  // namespace lirav
