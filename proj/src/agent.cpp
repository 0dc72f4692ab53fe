#include "lirav/agent.hpp"

#include "lirav/log.hpp"

namespace lirav {

namespace {

using Clock = std::chrono::steady_clock;

std::chrono::milliseconds left(Clock::time_point deadline) {
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return ms.count() < 0 ? std::chrono::milliseconds(0) : ms;
}

SessionResult failure(SessionOutcome outcome, std::string detail, std::optional<AbortReason> reason = {}) {
  SessionResult r;
  r.outcome = outcome;
  r.reason = reason;
  r.detail = std::move(detail);
  return r;
}

SessionResult from_error(const Error& e) {
  if (e.code() == Errc::Timeout) return failure(SessionOutcome::Timeout, e.what());
  return failure(SessionOutcome::TransportError, e.what());
}

void send_abort(Endpoint& ep, AbortReason reason) {
  const std::uint8_t code = static_cast<std::uint8_t>(reason);
  try {
    ep.send(FrameType::Error, ByteView(&code, 1));
  } catch (const Error&) {
    // Courtesy only; the peer may already be gone.
  }
}

SessionResult peer_aborted(const Frame& f) {
  std::optional<AbortReason> reason;
  if (f.payload.size() == 1) reason = abort_reason_from_code(f.payload[0]);
  return failure(SessionOutcome::PeerAborted, "peer aborted", reason);
}

SessionResult local_abort(Endpoint& ep, const SessionState& st, AbortReason reason) {
  log::warn(std::string(to_string(st.role)) + " aborted: " + std::string(to_string(reason)));
  send_abort(ep, reason);
  return failure(SessionOutcome::Aborted, std::string(to_string(reason)), reason);
}

SessionResult established(SessionState& st) {
  SessionResult r;
  r.outcome = SessionOutcome::Established;
  r.peer_id = st.peer_id;
  r.key = std::move(st.key);
  st.key.reset();
  log::info(std::string(to_string(st.role)) + " established with " + r.peer_id + " key fp " +
            key_fingerprint(*r.key));
  return r;
}

// Waits for a frame the current phase can use. Protocol frames the state
// machine rejects as out of order (duplicates, replays of earlier steps)
// are dropped and the wait continues.
std::optional<Frame> next_frame(Device& device, SessionState& st, Endpoint& ep, Clock::time_point deadline,
                                FrameType wanted) {
  for (;;) {
    Frame f = ep.receive(left(deadline));
    if (f.type == wanted || f.type == FrameType::Error) return f;
    if (f.type == FrameType::Confirm) {
      log::debug("ignoring stray confirmation record");
      continue;
    }
    try {
      handle_message(device, st, static_cast<MessageType>(f.type), f.payload);
    } catch (const Error& e) {
      if (e.code() != Errc::UnexpectedMessage) throw;
      log::debug(std::string("ignoring ") + std::string(to_string(f.type)) + ": " + e.what());
      continue;
    }
    return std::nullopt;
  }
}

}  // namespace

std::string_view to_string(SessionOutcome outcome) noexcept {
  switch (outcome) {
    case SessionOutcome::Established: return "Established";
    case SessionOutcome::Aborted: return "Aborted";
    case SessionOutcome::PeerAborted: return "PeerAborted";
    case SessionOutcome::Timeout: return "Timeout";
    case SessionOutcome::TransportError: return "TransportError";
  }
  return "?";
}

SessionResult run_initiator(Device& device, Endpoint& ep, std::string_view peer_id, const AgentOptions& options) {
  const auto deadline = Clock::now() + options.timeout;
  SessionState st;
  try {
    auto [state, m1] = initiate(device, peer_id);
    st = std::move(state);
    ep.send(FrameType::M1, m1.encode());

    auto f = next_frame(device, st, ep, deadline, FrameType::M2);
    if (!f) return failure(SessionOutcome::TransportError, "unexpected protocol progress");
    if (f->type == FrameType::Error) return peer_aborted(*f);
    auto reply = handle_message(device, st, MessageType::M2, f->payload, options.after_quote);
    ep.send(FrameType::M3, reply->second);

    for (;;) {
      Frame c = ep.receive(left(deadline));
      if (c.type == FrameType::Error) return peer_aborted(c);
      if (c.type == FrameType::Confirm) {
        if (check_confirmation(st, c.payload)) return established(st);
        return failure(SessionOutcome::TransportError, "invalid confirmation record");
      }
      log::debug("ignoring " + std::string(to_string(c.type)) + " while awaiting confirmation");
    }
  } catch (const ProtocolAbort& e) {
    return local_abort(ep, st, e.reason());
  } catch (const Error& e) {
    if (e.code() == Errc::UnknownPeer) return failure(SessionOutcome::Aborted, e.what());
    return from_error(e);
  }
}

SessionResult run_responder(Device& device, Endpoint& ep, const AgentOptions& options) {
  const auto deadline = Clock::now() + options.timeout;
  SessionState st = SessionState::responder();
  try {
    Frame f1 = ep.receive(options.timeout);
    if (f1.type == FrameType::Error) return peer_aborted(f1);
    if (f1.type != FrameType::M1) return failure(SessionOutcome::TransportError, "session did not start with M1");
    auto reply = handle_message(device, st, MessageType::M1, f1.payload, options.after_quote);
    ep.send(FrameType::M2, reply->second);

    auto f3 = next_frame(device, st, ep, deadline, FrameType::M3);
    if (f3 && f3->type == FrameType::Error) return peer_aborted(*f3);
    if (f3) handle_message(device, st, MessageType::M3, f3->payload);
    ep.send(FrameType::Confirm, confirmation_record(st));
    return established(st);
  } catch (const ProtocolAbort& e) {
    return local_abort(ep, st, e.reason());
  } catch (const Error& e) {
    return from_error(e);
  }
}

}  // namespace lirav
