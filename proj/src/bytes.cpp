#include "lirav/bytes.hpp"

#include <sodium.h>

#include <iomanip>
#include <sstream>

namespace lirav {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::LockedEntry: return "LockedEntry";
    case Errc::ReservedCombination: return "ReservedCombination";
    case Errc::AccessFault: return "AccessFault";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::GateViolation: return "GateViolation";
    case Errc::UnknownPeer: return "UnknownPeer";
    case Errc::InsufficientEntropy: return "InsufficientEntropy";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicatePeer: return "DuplicatePeer";
    case Errc::ChannelClosed: return "ChannelClosed";
    case Errc::Timeout: return "Timeout";
    case Errc::UnexpectedMessage: return "UnexpectedMessage";
    case Errc::FrameError: return "FrameError";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

Error Error::access_fault(std::uint32_t address) {
  std::ostringstream os;
  os << "access fault at 0x" << std::hex << std::setw(8) << std::setfill('0') << address;
  Error e(Errc::AccessFault, os.str());
  e.address_ = address;
  return e;
}

Error Error::parse_error(std::size_t line, const std::string& what) {
  Error e(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
  e.line_ = line;
  return e;
}

std::string_view to_string(AbortReason reason) noexcept {
  switch (reason) {
    case AbortReason::BadTag: return "BadTag";
    case AbortReason::BadSignature: return "BadSignature";
    case AbortReason::MeasurementMismatch: return "MeasurementMismatch";
    case AbortReason::Malformed: return "Malformed";
    case AbortReason::WeakPoint: return "WeakPoint";
  }
  return "Unknown";
}

std::optional<AbortReason> abort_reason_from_code(std::uint8_t code) noexcept {
  if (code >= 0x01 && code <= 0x05) return static_cast<AbortReason>(code);
  return std::nullopt;
}

ProtocolAbort::ProtocolAbort(AbortReason reason)
    : std::runtime_error("protocol abort: " + std::string(to_string(reason))), reason_(reason) {}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::ParseError, "odd-length hex string");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::ParseError, "invalid hex character");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

bool constant_time_equal(ByteView a, ByteView b) noexcept {
  if (a.size() != b.size()) return false;
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc |= static_cast<std::uint8_t>(a[i] ^ b[i]);
  return acc == 0;
}

void secure_wipe(std::span<std::uint8_t> bytes) noexcept {
  if (!bytes.empty()) sodium_memzero(bytes.data(), bytes.size());
}

void append(Bytes& out, ByteView in) { out.insert(out.end(), in.begin(), in.end()); }

void append_be32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void append_be64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t load_be32(ByteView in) {
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | in[i];
  return v;
}

std::uint64_t load_be64(ByteView in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | in[i];
  return v;
}

}  // namespace lirav
