#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "lirav/device.hpp"
#include "lirav/quote.hpp"

// Three-message mutual attestation with X25519 key agreement:
//
//   M1  A -> B : n_A || q_A || AR
//   M2  B -> A : n_B || q_B || AR || AE_K(Q_B || sig_B(H(Q_B || n_A || n_B || q_B || q_A)))
//   M3  A -> B : AE_K(Q_A || sig_A(H(Q_A || n_A || n_B || q_A || q_B)))
//
// Each party attests itself through its device's ROM entry points and
// verifies the peer against its trust store. Any failed check aborts the
// session locally with a reason code.

namespace lirav {

inline constexpr std::uint8_t kAttestationRequest = 0x01;
inline constexpr std::size_t kResponsePlaintextSize = kQuoteWireSize + kSignatureSize;  // 180
inline constexpr std::size_t kSealedResponseSize = kResponsePlaintextSize + kAeTagSize;  // 196
inline constexpr std::size_t kM1Size = 32 + 32 + 1;
inline constexpr std::size_t kM2Size = kM1Size + kSealedResponseSize;
inline constexpr std::size_t kM3Size = kSealedResponseSize;

using SessionKey = Secret<32>;
using QuoteWire = ByteArray<kQuoteWireSize>;

struct WireM1 {
  Nonce n_a{};
  PublicPoint q_a{};
  std::uint8_t ar = kAttestationRequest;

  Bytes encode() const;
  /// Aborts with Malformed on a wrong length.
  static WireM1 decode(ByteView payload);
};

struct WireM2 {
  Nonce n_b{};
  PublicPoint q_b{};
  std::uint8_t ar = kAttestationRequest;
  Bytes ct;

  Bytes encode() const;
  /// Aborts with Malformed when shorter than the fixed header. The
  /// ciphertext length is left to authentication.
  static WireM2 decode(ByteView payload);
};

struct WireM3 {
  Bytes ct;

  Bytes encode() const { return ct; }
  static WireM3 decode(ByteView payload) { return WireM3{Bytes(payload.begin(), payload.end())}; }
};

enum class Role { Initiator, Responder };
enum class Phase { Start, SentM1, SentM2, Established, Aborted };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Phase phase) noexcept;

struct SessionState {
  Role role = Role::Initiator;
  Phase phase = Phase::Start;
  std::optional<AbortReason> abort_reason;
  Nonce my_nonce{};
  Nonce peer_nonce{};
  PublicPoint my_q{};
  PublicPoint peer_q{};
  /// Ephemeral scalar; erased as soon as the session key is derived.
  std::optional<ScalarSecret> eph;
  /// Set once the peer's key share has been accepted. Released to the
  /// application only in the Established phase.
  std::optional<SessionKey> key;
  std::string peer_id;

  static SessionState responder() {
    SessionState st;
    st.role = Role::Responder;
    return st;
  }

  const Nonce& n_a() const noexcept { return role == Role::Initiator ? my_nonce : peer_nonce; }
  const Nonce& n_b() const noexcept { return role == Role::Initiator ? peer_nonce : my_nonce; }
  const PublicPoint& q_a() const noexcept { return role == Role::Initiator ? my_q : peer_q; }
  const PublicPoint& q_b() const noexcept { return role == Role::Initiator ? peer_q : my_q; }

  /// Diagnostic dump. Shows the ephemeral scalar while it is still held so
  /// erasure is observable; the session key appears only as a fingerprint.
  std::string describe() const;
};

/// First 8 hex characters of SHA3-256(K).
std::string key_fingerprint(const SessionKey& key);

/// Malware hook: runs on the prover's device after the ROM has written a
/// quote into the response buffer and before the agent reads it back.
using QuoteHook = std::function<void(Device&)>;

/// K = SHA3-256("LIRA-V/1/KDF" || shared || n_A || n_B). Aborts with
/// WeakPoint on an all-zero shared secret.
SessionKey derive_session_key(const SharedSecret& shared, const Nonce& n_a, const Nonce& n_b);

Digest transcript_hash(const QuoteWire& quote, const Nonce& n_first, const Nonce& n_second,
                       const PublicPoint& q_first, const PublicPoint& q_second);

/// AE nonce domain. Confirm is the responder's post-handshake key
/// confirmation record.
enum class AeDirection : std::uint8_t { M2 = 0x02, M3 = 0x03, Confirm = 0x04 };

/// First 24 bytes of SHA3-256("LIRA-V/1/AE" || direction || n_A || n_B).
AeNonce ae_nonce(AeDirection direction, const Nonce& n_a, const Nonce& n_b);
Bytes ae_seal(const SessionKey& key, AeDirection direction, const Nonce& n_a, const Nonce& n_b, ByteView plaintext);
/// Aborts with BadTag on any authentication failure.
Bytes ae_open(const SessionKey& key, AeDirection direction, const Nonce& n_a, const Nonce& n_b, ByteView ciphertext);

/// Starts a session toward `peer_id`. Throws Error(UnknownPeer).
std::pair<SessionState, WireM1> initiate(Device& device, std::string_view peer_id);

/// Responder step. `st` must be a fresh responder state. On failure the
/// state moves to Aborted and ProtocolAbort is thrown.
WireM2 respond_m1(Device& device, SessionState& st, const WireM1& m1, const QuoteHook& hook = {});

/// Initiator step: verifies B, attests A. Aborts on BadTag, Malformed,
/// BadSignature, MeasurementMismatch or WeakPoint.
WireM3 process_m2(Device& device, SessionState& st, const WireM2& m2, const QuoteHook& hook = {});

/// Responder final step. The peer is whichever trust-store entry's key
/// verifies the transcript signature.
void process_m3(Device& device, SessionState& st, const WireM3& m3);

enum class MessageType : std::uint8_t { M1 = 0x01, M2 = 0x02, M3 = 0x03 };

/// Routes a message to the step the current phase allows. Anything out of
/// order throws Error(UnexpectedMessage) and leaves the state untouched.
/// Returns the reply to send, if any.
std::optional<std::pair<MessageType, Bytes>> handle_message(Device& device, SessionState& st, MessageType type,
                                                            ByteView payload, const QuoteHook& hook = {});

/// Responder's key-confirmation record (authenticated empty message).
Bytes confirmation_record(const SessionState& st);
bool check_confirmation(const SessionState& st, ByteView record) noexcept;

}  // namespace lirav
