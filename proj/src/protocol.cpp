#include "lirav/protocol.hpp"

#include <algorithm>

#include "lirav/sha3.hpp"

namespace lirav {

namespace {

const std::string kKdfLabel = "LIRA-V/1/KDF";
const std::string kAeLabel = "LIRA-V/1/AE";

[[noreturn]] void abort_session(SessionState& st, AbortReason reason) {
  st.phase = Phase::Aborted;
  st.abort_reason = reason;
  st.eph.reset();
  st.key.reset();
  throw ProtocolAbort(reason);
}

template <std::size_t N>
ByteArray<N> take(ByteView in, std::size_t offset) {
  ByteArray<N> out{};
  std::copy_n(in.begin() + static_cast<std::ptrdiff_t>(offset), N, out.begin());
  return out;
}

SessionKey agree(SessionState& st, const PublicPoint& peer_q) {
  auto shared = x25519_shared(*st.eph, peer_q);
  st.eph.reset();
  if (!shared) abort_session(st, AbortReason::WeakPoint);
  return derive_session_key(*shared, st.n_a(), st.n_b());
}

// Attestation agent side of the prover: have ROM produce the quote, read it
// back from the response buffer, then have ROM sign the transcript bound to
// that exact quote.
Bytes attest_and_sign(Device& dev, const SessionState& st, const QuoteHook& hook) {
  dev.rom_attest();
  if (hook) hook(dev);
  const std::uint32_t buf = dev.response_buffer_address();
  Bytes quote = dev.read(buf, static_cast<std::uint32_t>(kQuoteWireSize));
  const QuoteWire qw = take<kQuoteWireSize>(quote, 0);
  const Digest h = st.role == Role::Responder ? transcript_hash(qw, st.n_a(), st.n_b(), st.q_b(), st.q_a())
                                              : transcript_hash(qw, st.n_a(), st.n_b(), st.q_a(), st.q_b());
  dev.rom_sign_transcript(h);
  Bytes sig = dev.read(buf + static_cast<std::uint32_t>(kQuoteWireSize), static_cast<std::uint32_t>(kSignatureSize));
  append(quote, sig);
  return quote;
}

struct OpenedResponse {
  Quote quote;
  QuoteWire wire;
  Signature sigma;
};

OpenedResponse parse_response(SessionState& st, ByteView plaintext) {
  if (plaintext.size() != kResponsePlaintextSize) abort_session(st, AbortReason::Malformed);
  auto quote = parse_quote(plaintext.first(kQuoteWireSize));
  if (!quote) abort_session(st, AbortReason::Malformed);
  return {*quote, take<kQuoteWireSize>(plaintext, 0), take<kSignatureSize>(plaintext, kQuoteWireSize)};
}

void check_quote(SessionState& st, const PeerRecord& peer, const Quote& quote) {
  switch (verify_quote(peer.verify_key, quote, peer.expected)) {
    case QuoteVerdict::Accept:
      return;
    case QuoteVerdict::BadSignature:
      abort_session(st, AbortReason::BadSignature);
    case QuoteVerdict::MeasurementMismatch:
      abort_session(st, AbortReason::MeasurementMismatch);
  }
  abort_session(st, AbortReason::Malformed);
}

[[noreturn]] void unexpected(const SessionState& st, std::string_view what) {
  throw Error(Errc::UnexpectedMessage, std::string(what) + " not accepted in phase " +
                                           std::string(to_string(st.phase)) + " as " +
                                           std::string(to_string(st.role)));
}

}  // namespace

Bytes WireM1::encode() const {
  Bytes out;
  out.reserve(kM1Size);
  append(out, n_a);
  append(out, q_a);
  out.push_back(ar);
  return out;
}

WireM1 WireM1::decode(ByteView payload) {
  if (payload.size() != kM1Size) throw ProtocolAbort(AbortReason::Malformed);
  return WireM1{take<32>(payload, 0), take<32>(payload, 32), payload[64]};
}

Bytes WireM2::encode() const {
  Bytes out;
  out.reserve(kM1Size + ct.size());
  append(out, n_b);
  append(out, q_b);
  out.push_back(ar);
  append(out, ct);
  return out;
}

WireM2 WireM2::decode(ByteView payload) {
  if (payload.size() < kM1Size) throw ProtocolAbort(AbortReason::Malformed);
  return WireM2{take<32>(payload, 0), take<32>(payload, 32), payload[64],
                Bytes(payload.begin() + kM1Size, payload.end())};
}

std::string_view to_string(Role role) noexcept {
  return role == Role::Initiator ? "initiator" : "responder";
}

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::Start: return "Start";
    case Phase::SentM1: return "SentM1";
    case Phase::SentM2: return "SentM2";
    case Phase::Established: return "Established";
    case Phase::Aborted: return "Aborted";
  }
  return "?";
}

std::string SessionState::describe() const {
  std::string out = "role=" + std::string(to_string(role)) + " phase=" + std::string(to_string(phase));
  if (abort_reason) out += " reason=" + std::string(to_string(*abort_reason));
  out += " n_self=" + to_hex(my_nonce) + " n_peer=" + to_hex(peer_nonce);
  out += " q_self=" + to_hex(my_q) + " q_peer=" + to_hex(peer_q);
  out += " eph=" + (eph ? to_hex(eph->bytes()) : std::string("erased"));
  out += " key=" + (key ? "fp:" + key_fingerprint(*key) : std::string("none"));
  if (!peer_id.empty()) out += " peer=" + peer_id;
  return out;
}

std::string key_fingerprint(const SessionKey& key) { return to_hex(sha3_256(key.bytes())).substr(0, 8); }

SessionKey derive_session_key(const SharedSecret& shared, const Nonce& n_a, const Nonce& n_b) {
  if (shared.is_zero()) throw ProtocolAbort(AbortReason::WeakPoint);
  return SessionKey(sha3_256({view(kKdfLabel), shared.bytes(), n_a, n_b}));
}

Digest transcript_hash(const QuoteWire& quote, const Nonce& n_first, const Nonce& n_second,
                       const PublicPoint& q_first, const PublicPoint& q_second) {
  return sha3_256({quote, n_first, n_second, q_first, q_second});
}

AeNonce ae_nonce(AeDirection direction, const Nonce& n_a, const Nonce& n_b) {
  const std::uint8_t dir = static_cast<std::uint8_t>(direction);
  const Digest d = sha3_256({view(kAeLabel), ByteView(&dir, 1), n_a, n_b});
  return take<24>(d, 0);
}

Bytes ae_seal(const SessionKey& key, AeDirection direction, const Nonce& n_a, const Nonce& n_b, ByteView plaintext) {
  return secretbox_seal(key, ae_nonce(direction, n_a, n_b), plaintext);
}

Bytes ae_open(const SessionKey& key, AeDirection direction, const Nonce& n_a, const Nonce& n_b, ByteView ciphertext) {
  auto pt = secretbox_open(key, ae_nonce(direction, n_a, n_b), ciphertext);
  if (!pt) throw ProtocolAbort(AbortReason::BadTag);
  return std::move(*pt);
}

std::pair<SessionState, WireM1> initiate(Device& device, std::string_view peer_id) {
  if (!device.trust_store().find(peer_id)) {
    throw Error(Errc::UnknownPeer, "no trust-store entry for '" + std::string(peer_id) + "'");
  }
  SessionState st;
  st.role = Role::Initiator;
  st.peer_id = std::string(peer_id);
  st.my_nonce = device.fresh_nonce();
  st.eph = device.fresh_scalar();
  st.my_q = x25519_public(*st.eph);
  st.phase = Phase::SentM1;
  WireM1 m1{st.my_nonce, st.my_q, kAttestationRequest};
  return {std::move(st), m1};
}

WireM2 respond_m1(Device& device, SessionState& st, const WireM1& m1, const QuoteHook& hook) {
  if (st.role != Role::Responder || st.phase != Phase::Start) unexpected(st, "M1");
  if (m1.ar != kAttestationRequest) abort_session(st, AbortReason::Malformed);
  st.peer_nonce = m1.n_a;
  st.peer_q = m1.q_a;
  st.my_nonce = device.fresh_nonce();
  st.eph = device.fresh_scalar();
  st.my_q = x25519_public(*st.eph);
  SessionKey key = agree(st, m1.q_a);

  Bytes response = attest_and_sign(device, st, hook);
  WireM2 m2{st.my_nonce, st.my_q, kAttestationRequest, ae_seal(key, AeDirection::M2, st.n_a(), st.n_b(), response)};
  secure_wipe(response);
  st.key = std::move(key);
  st.phase = Phase::SentM2;
  return m2;
}

WireM3 process_m2(Device& device, SessionState& st, const WireM2& m2, const QuoteHook& hook) {
  if (st.role != Role::Initiator || st.phase != Phase::SentM1) unexpected(st, "M2");
  if (m2.ar != kAttestationRequest) abort_session(st, AbortReason::Malformed);
  st.peer_nonce = m2.n_b;
  st.peer_q = m2.q_b;
  SessionKey key = agree(st, m2.q_b);

  Bytes plaintext;
  try {
    plaintext = ae_open(key, AeDirection::M2, st.n_a(), st.n_b(), m2.ct);
  } catch (const ProtocolAbort& e) {
    abort_session(st, e.reason());
  }
  const OpenedResponse resp = parse_response(st, plaintext);
  const PeerRecord* peer = device.trust_store().find(st.peer_id);
  if (!peer) abort_session(st, AbortReason::BadSignature);
  const Digest h = transcript_hash(resp.wire, st.n_a(), st.n_b(), st.q_b(), st.q_a());
  if (!ed25519_verify(peer->verify_key, h, resp.sigma)) abort_session(st, AbortReason::BadSignature);
  check_quote(st, *peer, resp.quote);

  Bytes response = attest_and_sign(device, st, hook);
  WireM3 m3{ae_seal(key, AeDirection::M3, st.n_a(), st.n_b(), response)};
  secure_wipe(response);
  st.key = std::move(key);
  st.phase = Phase::Established;
  return m3;
}

void process_m3(Device& device, SessionState& st, const WireM3& m3) {
  if (st.role != Role::Responder || st.phase != Phase::SentM2) unexpected(st, "M3");
  Bytes plaintext;
  try {
    plaintext = ae_open(*st.key, AeDirection::M3, st.n_a(), st.n_b(), m3.ct);
  } catch (const ProtocolAbort& e) {
    abort_session(st, e.reason());
  }
  const OpenedResponse resp = parse_response(st, plaintext);
  const Digest h = transcript_hash(resp.wire, st.n_a(), st.n_b(), st.q_a(), st.q_b());
  // M3 carries no identity; the transcript signature selects the peer.
  const PeerRecord* peer = nullptr;
  for (const PeerRecord& candidate : device.trust_store().peers()) {
    if (ed25519_verify(candidate.verify_key, h, resp.sigma)) {
      peer = &candidate;
      break;
    }
  }
  if (!peer) abort_session(st, AbortReason::BadSignature);
  check_quote(st, *peer, resp.quote);
  st.peer_id = peer->id;
  st.phase = Phase::Established;
}

std::optional<std::pair<MessageType, Bytes>> handle_message(Device& device, SessionState& st, MessageType type,
                                                            ByteView payload, const QuoteHook& hook) {
  auto decode_or_abort = [&](auto decode) {
    try {
      return decode(payload);
    } catch (const ProtocolAbort& e) {
      abort_session(st, e.reason());
    }
  };
  switch (type) {
    case MessageType::M1: {
      if (st.role != Role::Responder || st.phase != Phase::Start) unexpected(st, "M1");
      WireM1 m1 = decode_or_abort(&WireM1::decode);
      return std::pair{MessageType::M2, respond_m1(device, st, m1, hook).encode()};
    }
    case MessageType::M2: {
      if (st.role != Role::Initiator || st.phase != Phase::SentM1) unexpected(st, "M2");
      WireM2 m2 = decode_or_abort(&WireM2::decode);
      return std::pair{MessageType::M3, process_m2(device, st, m2, hook).encode()};
    }
    case MessageType::M3: {
      if (st.role != Role::Responder || st.phase != Phase::SentM2) unexpected(st, "M3");
      process_m3(device, st, WireM3::decode(payload));
      return std::nullopt;
    }
  }
  unexpected(st, "unknown message");
}

Bytes confirmation_record(const SessionState& st) {
  if (st.phase != Phase::Established || !st.key) throw Error(Errc::UnexpectedMessage, "session not established");
  return ae_seal(*st.key, AeDirection::Confirm, st.n_a(), st.n_b(), {});
}

bool check_confirmation(const SessionState& st, ByteView record) noexcept {
  if (st.phase != Phase::Established || !st.key) return false;
  try {
    auto pt = secretbox_open(*st.key, ae_nonce(AeDirection::Confirm, st.n_a(), st.n_b()), record);
    return pt && pt->empty();
  } catch (...) {
    return false;
  }
}

}  // namespace lirav
