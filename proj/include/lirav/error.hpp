#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lirav {

enum class Errc {
  LockedEntry,
  ReservedCombination,
  AccessFault,
  OutOfRange,
  InvalidRange,
  InvalidConfig,
  GateViolation,
  UnknownPeer,
  InsufficientEntropy,
  ParseError,
  DuplicatePeer,
  ChannelClosed,
  Timeout,
  UnexpectedMessage,
  FrameError,
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  static Error access_fault(std::uint32_t address);
  static Error parse_error(std::size_t line, const std::string& what);

  Errc code() const noexcept { return code_; }
  /// First denied address for AccessFault.
  std::optional<std::uint32_t> address() const noexcept { return address_; }
  /// 1-based source line for ParseError raised by a line-oriented parser.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  Errc code_;
  std::optional<std::uint32_t> address_;
  std::optional<std::size_t> line_;
};

/// Reason codes carried by the courtesy error frame. Values are wire-stable.
enum class AbortReason : std::uint8_t {
  BadTag = 0x01,
  BadSignature = 0x02,
  MeasurementMismatch = 0x03,
  Malformed = 0x04,
  WeakPoint = 0x05,
};

std::string_view to_string(AbortReason reason) noexcept;
std::optional<AbortReason> abort_reason_from_code(std::uint8_t code) noexcept;

/// Thrown when a protocol step terminates the session.
class ProtocolAbort : public std::runtime_error {
 public:
  explicit ProtocolAbort(AbortReason reason);
  AbortReason reason() const noexcept { return reason_; }

 private:
  AbortReason reason_;
};

}  // namespace lirav
