#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "lirav/protocol.hpp"
#include "lirav/transport.hpp"

namespace lirav {

enum class SessionOutcome {
  Established,
  /// This side aborted; `reason` says why.
  Aborted,
  /// The peer sent an error frame.
  PeerAborted,
  Timeout,
  TransportError,
};

std::string_view to_string(SessionOutcome outcome) noexcept;

struct SessionResult {
  SessionOutcome outcome = SessionOutcome::TransportError;
  std::optional<AbortReason> reason;
  std::string peer_id;
  /// Present only for Established.
  std::optional<SessionKey> key;
  std::string detail;

  bool established() const noexcept { return outcome == SessionOutcome::Established; }
};

struct AgentOptions {
  std::chrono::milliseconds timeout = kDefaultTimeout;
  /// Runs between quote production and transmission on this device.
  QuoteHook after_quote;
};

/// Drives one session as A. The key is released only after the responder's
/// confirmation record proves it accepted M3.
SessionResult run_initiator(Device& device, Endpoint& endpoint, std::string_view peer_id,
                            const AgentOptions& options = {});

/// Drives one session as B.
SessionResult run_responder(Device& device, Endpoint& endpoint, const AgentOptions& options = {});

}  // namespace lirav
