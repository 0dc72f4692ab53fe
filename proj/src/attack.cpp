#include "lirav/attack.hpp"

#include <algorithm>
#include <future>

#include "lirav/protocol.hpp"
#include "lirav/sha3.hpp"
#include "lirav/testbed.hpp"

namespace lirav::attack {

namespace {

Verdict aborted(AbortReason r) { return Verdict{VerdictKind::Aborted, r, {}}; }
Verdict kind(VerdictKind k, std::string detail = {}) { return Verdict{k, std::nullopt, std::move(detail)}; }

Verdict from_session(const SessionResult& r, const std::string& side) {
  switch (r.outcome) {
    case SessionOutcome::Established:
      return kind(VerdictKind::Established, side + " established");
    case SessionOutcome::Aborted:
      if (r.reason) return Verdict{VerdictKind::Aborted, r.reason, side + " aborted"};
      return kind(VerdictKind::Other, side + ": " + r.detail);
    case SessionOutcome::Timeout:
      return kind(VerdictKind::Timeout, side + " timed out");
    case SessionOutcome::PeerAborted:
      return kind(VerdictKind::Other, side + " saw the peer abort");
    case SessionOutcome::TransportError:
      return kind(VerdictKind::Other, side + " transport error: " + r.detail);
  }
  return kind(VerdictKind::Other);
}

Testbed world(const ScenarioOptions& o) {
  TestbedOptions t;
  t.seed = o.seed;
  return Testbed::create(t);
}

AgentOptions agent(std::chrono::milliseconds timeout) {
  AgentOptions a;
  a.timeout = timeout;
  return a;
}

template <class Fn>
Verdict expect_error(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == Errc::AccessFault) return kind(VerdictKind::AccessFault, e.what());
    if (e.code() == Errc::LockedEntry) return kind(VerdictKind::LockedEntry, e.what());
    return kind(VerdictKind::Other, e.what());
  }
  return kind(VerdictKind::Other, "operation was permitted");
}

// Records every frame in both directions of an honest session.
struct Recording {
  std::shared_ptr<std::vector<Bytes>> a_to_b = std::make_shared<std::vector<Bytes>>();
  std::shared_ptr<std::vector<Bytes>> b_to_a = std::make_shared<std::vector<Bytes>>();
};

Recording record_honest_session(Testbed& t, const ScenarioOptions& o) {
  Recording rec;
  PairResult r = run_pair(*t.a, *t.b, ChannelHooks{hooks::record(rec.a_to_b), hooks::record(rec.b_to_a)},
                          agent(o.timeout), agent(o.timeout));
  if (!r.a.established() || !r.b.established()) throw Error(Errc::InvalidConfig, "honest session failed");
  return rec;
}

DeliveryHook replace_nth(std::size_t n, Bytes replacement) {
  return hooks::mutate_nth(n, [replacement = std::move(replacement)](Bytes& f) { f = replacement; });
}

Verdict pmp_lock_rewrite(const ScenarioOptions& o) {
  Testbed t = world(o);
  const PmpEntry before = t.b->pmp_entry(0);
  Verdict v = expect_error([&] {
    t.b->pmp_configure(0, PmpConfig{true, true, true, AddrMode::Napot, false}, before.addr_reg);
  });
  if (t.b->pmp_entry(0) != before) return kind(VerdictKind::Other, "locked entry changed");
  return v;
}

Verdict removable_memory(const ScenarioOptions& o) {
  // B's responses never reach A, as if the peer were unplugged mid-session.
  Testbed t = world(o);
  PairResult r = run_pair(*t.a, *t.b, ChannelHooks{{}, hooks::drop_all()}, agent(o.short_timeout),
                          agent(o.short_timeout));
  return from_session(r.a, "A");
}

Verdict quote_overwrite(const ScenarioOptions& o) {
  Testbed t = world(o);
  AgentOptions b = agent(o.timeout);
  b.after_quote = [](Device& d) { d.write(d.response_buffer_address(), Bytes(kQuoteWireSize, 0)); };
  PairResult r = run_pair(*t.a, *t.b, {}, agent(o.timeout), b);
  return from_session(r.a, "A");
}

Verdict key_read_attempt(const ScenarioOptions& o) {
  Testbed t = world(o);
  return expect_error([&] { t.b->read(t.b->key_address(), 32); });
}

Verdict m2_replay(const ScenarioOptions& o) {
  Testbed t = world(o);
  Recording old = record_honest_session(t, o);
  PairResult r = run_pair(*t.a, *t.b, ChannelHooks{{}, replace_nth(0, old.b_to_a->at(0))}, agent(o.timeout),
                          agent(o.timeout));
  return from_session(r.a, "A");
}

Verdict m3_splice(const ScenarioOptions& o) {
  Testbed t = world(o);
  Recording old = record_honest_session(t, o);
  PairResult r = run_pair(*t.a, *t.b, ChannelHooks{replace_nth(1, old.a_to_b->at(1)), {}}, agent(o.timeout),
                          agent(o.timeout));
  return from_session(r.b, "B");
}

Verdict ciphertext_bitflip(const ScenarioOptions& o) {
  Testbed t = world(o);
  auto flip = hooks::mutate_nth(0, [](Bytes& f) { f[kFrameHeaderSize + kM1Size + 5] ^= 0x01; });
  PairResult r = run_pair(*t.a, *t.b, ChannelHooks{{}, flip}, agent(o.timeout), agent(o.timeout));
  return from_session(r.a, "A");
}

Verdict q_value_swap(const ScenarioOptions& o) {
  // Man in the middle with its own key shares toward both sides: it opens
  // B's response under the key it shares with B and re-seals it for A.
  Testbed t = world(o);
  DeterministicRandom rng(sha3_256({o.seed, view(std::string("mitm"))}));
  ScalarSecret x, y;
  rng.fill(x.mutable_bytes());
  rng.fill(y.mutable_bytes());

  auto [st_a, m1] = initiate(*t.a, t.b->id());
  WireM1 forged = m1;
  forged.q_a = x25519_public(x);
  SessionState st_b = SessionState::responder();
  WireM2 m2 = respond_m1(*t.b, st_b, forged);

  SessionKey k_xb = derive_session_key(*x25519_shared(x, m2.q_b), m1.n_a, m2.n_b);
  Bytes harvested = ae_open(k_xb, AeDirection::M2, m1.n_a, m2.n_b, m2.ct);

  WireM2 to_a = m2;
  to_a.q_b = x25519_public(y);
  SessionKey k_ya = derive_session_key(*x25519_shared(y, m1.q_a), m1.n_a, m2.n_b);
  to_a.ct = ae_seal(k_ya, AeDirection::M2, m1.n_a, m2.n_b, harvested);
  try {
    process_m2(*t.a, st_a, to_a);
  } catch (const ProtocolAbort& e) {
    return Verdict{VerdictKind::Aborted, e.reason(), "A aborted"};
  }
  return kind(VerdictKind::Established, "A accepted the swapped key share");
}

Verdict nonce_reuse_detection(const ScenarioOptions& o) {
  // Replays a complete initiator side (M1 then M3) of an old session to B.
  Testbed t = world(o);
  auto [st_a, m1] = initiate(*t.a, t.b->id());
  SessionState st_b = SessionState::responder();
  WireM2 m2 = respond_m1(*t.b, st_b, m1);
  WireM3 m3 = process_m2(*t.a, st_a, m2);
  process_m3(*t.b, st_b, m3);
  const std::size_t issued = t.b->nonces_issued();

  SessionState replay = SessionState::responder();
  WireM2 fresh = respond_m1(*t.b, replay, m1);
  if (fresh.n_b == m2.n_b || t.b->nonces_issued() != issued + 1) {
    return kind(VerdictKind::Other, "responder reused a nonce");
  }
  try {
    process_m3(*t.b, replay, m3);
  } catch (const ProtocolAbort& e) {
    return Verdict{VerdictKind::Aborted, e.reason(), "B aborted"};
  }
  return kind(VerdictKind::Established, "B accepted a replayed session");
}

Verdict message_drop(const ScenarioOptions& o) {
  Testbed t = world(o);
  PairResult r = run_pair(*t.a, *t.b, ChannelHooks{hooks::drop_nth(1), {}}, agent(o.short_timeout),
                          agent(o.short_timeout));
  return from_session(r.b, "B");
}

Verdict firmware_tamper(const ScenarioOptions& o) {
  Testbed t = world(o);
  const std::uint32_t addr = t.b->attestation_config().start_addr + 100;
  Bytes byte = t.b->read(addr, 1);
  byte[0] ^= 0xFF;
  t.b->write(addr, byte);
  PairResult r = run_pair(*t.a, *t.b, {}, agent(o.timeout), agent(o.timeout));
  return from_session(r.a, "A");
}

std::vector<Scenario> build_catalog() {
  using enum VerdictKind;
  return {
      {"pmp-lock-rewrite", "untrusted firmware rewrites the locked key-region entry", kind(LockedEntry),
       pmp_lock_rewrite},
      {"removable-memory", "every frame from B is lost", kind(Timeout), removable_memory},
      {"quote-overwrite", "malware on B zeroes the quote before it is sent", aborted(AbortReason::Malformed),
       quote_overwrite},
      {"key-read-attempt", "untrusted firmware reads the embedded signing key", kind(AccessFault),
       key_read_attempt},
      {"m2-replay", "B's M2 from an earlier session is replayed to A", aborted(AbortReason::BadTag), m2_replay},
      {"m3-cross-session-splice", "A's M3 from an earlier session is spliced into a new one",
       aborted(AbortReason::BadTag), m3_splice},
      {"ciphertext-bitflip", "one ciphertext bit of M2 is flipped in flight", aborted(AbortReason::BadTag),
       ciphertext_bitflip},
      {"q-value-swap", "man in the middle substitutes its own key shares", aborted(AbortReason::BadSignature),
       q_value_swap},
      {"nonce-reuse-detection", "an old M1 and M3 are replayed to B", aborted(AbortReason::BadTag),
       nonce_reuse_detection},
      {"message-drop", "M3 is dropped", kind(Timeout), message_drop},
      {"firmware-tamper", "one byte of B's attested flash is modified",
       aborted(AbortReason::MeasurementMismatch), firmware_tamper},
  };
}

}  // namespace

std::string_view to_string(VerdictKind k) noexcept {
  switch (k) {
    case VerdictKind::Aborted: return "Aborted";
    case VerdictKind::AccessFault: return "AccessFault";
    case VerdictKind::LockedEntry: return "LockedEntry";
    case VerdictKind::Timeout: return "Timeout";
    case VerdictKind::Established: return "Established";
    case VerdictKind::Other: return "Other";
  }
  return "?";
}

std::string Verdict::summary() const {
  std::string s(to_string(kind));
  if (reason) s += "(" + std::string(lirav::to_string(*reason)) + ")";
  return s;
}

const std::vector<Scenario>& catalog() {
  static const std::vector<Scenario> scenarios = build_catalog();
  return scenarios;
}

ScenarioReport run_scenario(const Scenario& scenario, const ScenarioOptions& options) {
  ScenarioOptions o = options;
  o.seed = sha3_256({options.seed, view(scenario.name)});
  ScenarioReport report{scenario.name, scenario.expected, {}, false};
  try {
    report.observed = scenario.run(o);
  } catch (const std::exception& e) {
    report.observed = kind(VerdictKind::Other, e.what());
  }
  report.passed = report.observed == report.expected;
  return report;
}

std::vector<ScenarioReport> run_catalog(const ScenarioOptions& options, const std::vector<std::string>& only,
                                        bool parallel) {
  std::vector<const Scenario*> selected;
  for (const std::string& name : only) {
    auto it = std::find_if(catalog().begin(), catalog().end(), [&](const Scenario& s) { return s.name == name; });
    if (it == catalog().end()) throw Error(Errc::InvalidConfig, "unknown scenario '" + name + "'");
  }
  for (const Scenario& s : catalog()) {
    if (only.empty() || std::find(only.begin(), only.end(), s.name) != only.end()) selected.push_back(&s);
  }
  std::vector<ScenarioReport> reports;
  if (parallel) {
    std::vector<std::future<ScenarioReport>> jobs;
    for (const Scenario* s : selected) {
      jobs.push_back(std::async(std::launch::async, [s, &options] { return run_scenario(*s, options); }));
    }
    for (auto& j : jobs) reports.push_back(j.get());
  } else {
    for (const Scenario* s : selected) reports.push_back(run_scenario(*s, options));
  }
  return reports;
}

}  // namespace lirav::attack
