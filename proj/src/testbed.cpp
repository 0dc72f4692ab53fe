#include "lirav/testbed.hpp"

#include <thread>

#include "lirav/sha3.hpp"

namespace lirav {

namespace {

ByteArray<32> derive(const ByteArray<32>& seed, const std::string& label) {
  return sha3_256({seed, view(label)});
}

Bytes random_bytes(const ByteArray<32>& seed, std::size_t n) {
  Bytes out(n);
  DeterministicRandom(seed).fill(out);
  return out;
}

DeviceProfile profile(const std::string& id, const ByteArray<32>& seed, const TestbedOptions& o) {
  DeviceProfile p;
  p.id = id;
  p.qsk = gen_identity(derive(seed, id + "/qsk")).secret;
  p.attestation = AttestationConfig{p.layout.flash.base, p.layout.flash.base + o.attested_bytes, o.block_size};
  return p;
}

std::unique_ptr<RandomSource> rng_for(const TestbedOptions& o, const std::string& id) {
  if (!o.deterministic) return make_system_random();
  return std::make_unique<DeterministicRandom>(derive(o.seed, id + "/rng"));
}

}  // namespace

Testbed Testbed::create(const TestbedOptions& o) {
  Testbed t;
  t.profile_a = profile("device-a", o.seed, o);
  t.profile_b = profile("device-b", o.seed, o);
  t.firmware_a = random_bytes(derive(o.seed, "device-a/fw"), o.attested_bytes);
  t.firmware_b = random_bytes(derive(o.seed, "device-b/fw"), o.attested_bytes);
  TrustStore trust_a = TrustStore::from_records({peer_record(t.profile_b, t.firmware_b)});
  TrustStore trust_b = TrustStore::from_records({peer_record(t.profile_a, t.firmware_a)});
  t.a = make_device(t.profile_a, t.firmware_a, trust_a, {}, rng_for(o, "device-a"));
  t.b = make_device(t.profile_b, t.firmware_b, trust_b, {}, rng_for(o, "device-b"));
  return t;
}

PairResult run_pair(Device& a, Device& b, ChannelHooks hooks, const AgentOptions& a_options,
                    const AgentOptions& b_options) {
  auto [ea, eb] = channel_pair(std::move(hooks));
  PairResult r;
  std::thread responder([&, ep = eb.get()] {
    r.b = run_responder(b, *ep, b_options);
  });
  r.a = run_initiator(a, *ea, b.id(), a_options);
  responder.join();
  return r;
}

}  // namespace lirav
