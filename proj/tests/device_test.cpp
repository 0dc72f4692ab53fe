#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "lirav/device.hpp"
#include "lirav/memory.hpp"

using namespace lirav;
using fixtures::make_test_device;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::Io;
}

}  // namespace

TEST(MemoryImage, SortedAndNonOverlapping) {
  MemoryImage img;
  img.add_region({0x2000, RegionKind::Flash, Bytes(0x100)});
  img.add_region({0x1000, RegionKind::Rom, Bytes(0x100)});
  ASSERT_EQ(img.regions().size(), 2u);
  EXPECT_EQ(img.regions()[0].base, 0x1000u);
  EXPECT_EQ(error_of([&] { img.add_region({0x10FF, RegionKind::Sram, Bytes(2)}); }), Errc::InvalidConfig);
  EXPECT_EQ(error_of([&] { img.add_region({0x3000, RegionKind::Sram, Bytes{}}); }), Errc::InvalidConfig);
}

TEST(MemoryImage, FindRequiresSingleRegion) {
  MemoryImage img;
  img.add_region({0x1000, RegionKind::Rom, Bytes(0x100)});
  img.add_region({0x1100, RegionKind::Flash, Bytes(0x100)});
  EXPECT_NE(img.find(0x1000, 0x100), nullptr);
  EXPECT_EQ(img.find(0x10F0, 0x20), nullptr);
  EXPECT_EQ(img.find(0x0, 4), nullptr);
}

TEST(Device, BootLocksKeyRegionAtEntryZero) {
  auto t = make_test_device();
  const PmpEntry e = t.dev->pmp_entry(Device::kKeyRegionEntry);
  EXPECT_EQ(e.config, PmpConfig::execute_only(AddrMode::Napot, true));
  const auto range = t.dev->pmp_match_range(0);
  ASSERT_TRUE(range);
  EXPECT_TRUE(range->contains(t.dev->key_address()));
  EXPECT_TRUE(range->contains(t.dev->key_address() + 31));
  EXPECT_TRUE(t.dev->boot_complete());
}

TEST(Device, UntrustedReadOfKeyFaults) {
  auto t = make_test_device();
  try {
    t.dev->read(t.dev->key_address(), 32);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AccessFault);
    EXPECT_EQ(e.address(), t.dev->key_address());
  }
}

TEST(Device, SramWriteReadBack) {
  auto t = make_test_device();
  const std::uint32_t a = t.dev->layout().sram.base + 0x200;
  Bytes data{1, 2, 3, 4, 5};
  t.dev->write(a, data);
  EXPECT_EQ(t.dev->read(a, 5), data);
}

TEST(Device, RomRejectsWrites) {
  auto t = make_test_device();
  const std::uint32_t rom = t.dev->layout().rom.base;
  EXPECT_EQ(error_of([&] { t.dev->write(rom, Bytes{0}); }), Errc::AccessFault);
  // The CRTM code area is readable but immutable.
  Bytes before = t.dev->read(rom, Device::kCrtmCodeSize);
  EXPECT_ANY_THROW(t.dev->write(rom + 0x10, Bytes(16, 0xEE)));
  EXPECT_EQ(t.dev->read(rom, Device::kCrtmCodeSize), before);
}

TEST(Device, UnmappedAccessIsOutOfRange) {
  auto t = make_test_device();
  EXPECT_EQ(error_of([&] { t.dev->read(0x10000000, 4); }), Errc::OutOfRange);
  const auto& sram = t.dev->layout().sram;
  EXPECT_EQ(error_of([&] { t.dev->read(sram.base + sram.size - 2, 4); }), Errc::OutOfRange);
}

TEST(Device, ResetReleasesLocksThenRomRelocks) {
  auto t = make_test_device();
  EXPECT_EQ(error_of([&] { t.dev->pmp_configure(0, PmpConfig{true, true, true, AddrMode::Napot, false}, 0); }),
            Errc::LockedEntry);
  // Untrusted code may lock other entries; reset clears them.
  t.dev->pmp_configure(5, PmpConfig{true, false, false, AddrMode::Na4, true}, 0x100);
  t.dev->write(t.dev->layout().sram.base, Bytes(64, 0x77));
  t.dev->reset();
  EXPECT_NO_THROW(t.dev->pmp_configure(5, PmpConfig{true, true, false, AddrMode::Off, false}, 0));
  EXPECT_EQ(t.dev->pmp_check(Access::Read, t.dev->key_address()), AccessVerdict::Deny);
  EXPECT_EQ(t.dev->pmp_entry(0).config, PmpConfig::execute_only(AddrMode::Napot, true));
  EXPECT_EQ(t.dev->read(t.dev->layout().sram.base, 64), Bytes(64, 0));
  // Flash contents survive reset.
  EXPECT_EQ(t.dev->read(t.dev->layout().flash.base, 16), Bytes(t.firmware.begin(), t.firmware.begin() + 16));
}

TEST(Device, ResetWithoutRomLockLeavesEntryFree) {
  auto t = make_test_device(4096, BootOptions{false});
  EXPECT_NO_THROW(t.dev->pmp_configure(0, PmpConfig{true, true, true, AddrMode::Napot, false}, 0));
}

// Random untrusted activity never exposes the key bytes.
TEST(DeviceProperty, KeySecretUnderUntrustedActivity) {
  auto t = make_test_device();
  std::mt19937 rng(11);
  const auto& lay = t.dev->layout();
  const std::uint32_t key_base = lay.key_region.base;
  for (int step = 0; step < 2000; ++step) {
    try {
      switch (rng() % 4) {
        case 0: {
          PmpConfig c = PmpConfig::decode(static_cast<std::uint8_t>(rng() & 0x9F));
          std::uint32_t reg = (rng() % 2) ? napot_encode(key_base, lay.key_region.size) : rng();
          t.dev->pmp_configure(rng() % 8, c, reg);
          break;
        }
        case 1:
          t.dev->write(lay.sram.base + rng() % 1024, Bytes(4, static_cast<std::uint8_t>(rng())));
          break;
        case 2:
          t.dev->write(lay.rom.base + rng() % lay.rom.size, Bytes(1, 0));
          break;
        default:
          t.dev->rom_attest();
      }
    } catch (const Error&) {
    }
    const std::uint32_t a = key_base + rng() % lay.key_region.size;
    ASSERT_EQ(error_of([&] { t.dev->read(a, 1); }), Errc::AccessFault) << step;
  }
  for (std::uint32_t a = key_base; a < key_base + lay.key_region.size; ++a) {
    ASSERT_EQ(t.dev->pmp_check(Access::Read, a), AccessVerdict::Deny);
  }
}

TEST(Device, TrustStoreRomBytesImmutable) {
  PeerRecord peer{"peer-x", {}, {Measurement{{}, AttestationConfig{0x20000000, 0x20001000, 1024}}}};
  peer.verify_key.fill(7);
  auto t = make_test_device(4096, {}, TrustStore::from_records({peer}));
  const RegionSpec r = t.dev->trust_store_rom_range();
  Bytes before = t.dev->read(r.base, r.size);
  for (std::uint32_t off = 0; off < r.size; off += 17) {
    EXPECT_EQ(error_of([&] { t.dev->write(r.base + off, Bytes{0xFF}); }), Errc::AccessFault);
  }
  EXPECT_EQ(t.dev->read(r.base, r.size), before);
  ASSERT_EQ(t.dev->trust_store().size(), 1u);
  EXPECT_EQ(t.dev->trust_store().peers()[0].id, "peer-x");
}

TEST(Device, NoncesAreFreshAndLogged) {
  auto t = make_test_device();
  std::set<Nonce> seen;
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(seen.insert(t.dev->fresh_nonce()).second);
  EXPECT_EQ(t.dev->nonces_issued(), 100u);
}

TEST(MemoryLayout, Validation) {
  MemoryLayout ok;
  EXPECT_NO_THROW(ok.validate());
  MemoryLayout overlap = ok;
  overlap.sram.base = ok.flash.base + 16;
  EXPECT_EQ(error_of([&] { overlap.validate(); }), Errc::InvalidConfig);
  MemoryLayout odd = ok;
  odd.key_region.size = 3000;
  EXPECT_EQ(error_of([&] { odd.validate(); }), Errc::InvalidConfig);
  MemoryLayout outside = ok;
  outside.key_region.base = 0x40000;
  EXPECT_EQ(error_of([&] { outside.validate(); }), Errc::InvalidConfig);
  MemoryLayout over_code = ok;
  over_code.key_region = {0x1000, 0x400};
  EXPECT_EQ(error_of([&] { over_code.validate(); }), Errc::InvalidConfig);
}
