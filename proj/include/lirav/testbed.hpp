#pragma once

#include <memory>

#include "lirav/agent.hpp"
#include "lirav/provisioning.hpp"

namespace lirav {

struct TestbedOptions {
  /// Drives identities, firmware contents and (when deterministic) device RNGs.
  ByteArray<32> seed{};
  std::uint32_t attested_bytes = 64 * 1024;
  std::uint32_t block_size = 1024;
  bool deterministic = true;
};

/// Two cross-provisioned devices, "device-a" and "device-b", each attesting
/// the start of its own flash.
struct Testbed {
  DeviceProfile profile_a;
  DeviceProfile profile_b;
  Bytes firmware_a;
  Bytes firmware_b;
  std::unique_ptr<Device> a;
  std::unique_ptr<Device> b;

  static Testbed create(const TestbedOptions& options = {});
};

struct PairResult {
  SessionResult a;
  SessionResult b;
};

/// One session over an in-memory channel: `a` initiates toward `b`, whose
/// agent runs on a separate thread.
PairResult run_pair(Device& a, Device& b, ChannelHooks hooks = {}, const AgentOptions& a_options = {},
                    const AgentOptions& b_options = {});

}  // namespace lirav
