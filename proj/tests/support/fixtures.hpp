#pragma once

#include <memory>

#include "lirav/device.hpp"
#include "lirav/provisioning.hpp"
#include "lirav/sha3.hpp"

namespace fixtures {

struct TestDevice {
  lirav::SigningSeed qsk;
  lirav::Bytes firmware;
  std::unique_ptr<lirav::Device> dev;
};

/// Seed bytes that are easy to spot in any dump.
inline lirav::ByteArray<32> sentinel(std::uint8_t tag) {
  lirav::ByteArray<32> s{};
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::uint8_t>(0xC0 ^ tag ^ (i * 29));
  return s;
}

inline lirav::Bytes pattern(std::size_t n, std::uint8_t tag) {
  lirav::Bytes b(n);
  lirav::DeterministicRandom(sentinel(tag)).fill(b);
  return b;
}

/// A device attesting the first `attested` bytes of flash.
inline TestDevice make_test_device(std::uint32_t attested = 4096, lirav::BootOptions boot = {},
                                   const lirav::TrustStore& trust = {}, std::uint8_t tag = 1,
                                   std::uint32_t block = 1024) {
  TestDevice t;
  t.qsk = lirav::SigningSeed(sentinel(tag));
  t.firmware = pattern(attested, tag);
  lirav::MemoryLayout layout;
  lirav::DeviceSpec spec{"dev-" + std::to_string(tag), layout,
                         lirav::AttestationConfig{layout.flash.base, layout.flash.base + attested, block}};
  t.dev = std::make_unique<lirav::Device>(spec, t.qsk, t.firmware, trust, boot,
                                          std::make_unique<lirav::DeterministicRandom>(sentinel(tag + 100)));
  return t;
}

}  // namespace fixtures
