#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lirav/bytes.hpp"

namespace lirav {

// Frame: "LRAV" || version || msg_type || length (u32 BE) || payload

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{'L', 'R', 'A', 'V'};
inline constexpr std::uint8_t kFrameVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 10;
inline constexpr std::size_t kMaxFramePayload = 65536;

enum class FrameType : std::uint8_t {
  M1 = 0x01,
  M2 = 0x02,
  M3 = 0x03,
  Confirm = 0x04,
  Error = 0xFF,
};

std::string_view to_string(FrameType type) noexcept;

struct Frame {
  FrameType type = FrameType::Error;
  Bytes payload;
};

/// Throws Error(FrameError) when the payload exceeds the cap.
Bytes encode_frame(FrameType type, ByteView payload);

enum class DecodeStatus { Ok, BadMagic, BadVersion, Oversize, Truncated };

std::string_view to_string(DecodeStatus status) noexcept;

struct DecodeResult {
  DecodeStatus status = DecodeStatus::Truncated;
  Frame frame;
  /// Bytes consumed from the input; nonzero only for Ok.
  std::size_t consumed = 0;
};

/// Decodes the first frame of `bytes`. Truncated means "need more input";
/// every other non-Ok status is fatal for the stream. An unknown message
/// type is reported as BadMagic since the header is not a frame header.
DecodeResult decode_frame(ByteView bytes) noexcept;

inline constexpr std::chrono::milliseconds kDefaultTimeout{5000};

/// One side of a reliable, ordered byte channel carrying frames.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  /// Throws ChannelClosed or Io.
  virtual void send(FrameType type, ByteView payload) = 0;
  /// Throws Timeout, ChannelClosed, or FrameError on a corrupt stream.
  virtual Frame receive(std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;
};

/// In-memory channel. A hook sees each encoded frame sent in its direction
/// and returns the byte chunks actually delivered: nothing to drop,
/// two copies to duplicate, modified bytes to corrupt, or withheld frames
/// released later to reorder.
using DeliveryHook = std::function<std::vector<Bytes>(Bytes frame)>;

struct ChannelHooks {
  DeliveryHook a_to_b;
  DeliveryHook b_to_a;
};

std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> channel_pair(ChannelHooks hooks = {});

namespace hooks {

/// Drops every frame.
DeliveryHook drop_all();
/// Drops the n-th frame (0-based) and passes the rest.
DeliveryHook drop_nth(std::size_t n);
DeliveryHook duplicate_nth(std::size_t n);
/// Holds the n-th frame back and delivers it right after the next one.
DeliveryHook swap_with_next(std::size_t n);
/// Applies `mutate` to the n-th frame.
DeliveryHook mutate_nth(std::size_t n, std::function<void(Bytes&)> mutate);
/// Copies every frame into `log` and passes it through.
DeliveryHook record(std::shared_ptr<std::vector<Bytes>> log);
/// Feeds the output of `first` into `second`.
DeliveryHook chain(DeliveryHook first, DeliveryHook second);

}  // namespace hooks

// TCP transport.

class TcpListener {
 public:
  /// Binds host:port; port 0 picks an ephemeral port. Throws Io.
  TcpListener(const std::string& host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Throws Timeout or Io.
  std::unique_ptr<Endpoint> accept(std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Retries refused connections until the timeout elapses. Throws Timeout or Io.
std::unique_ptr<Endpoint> tcp_connect(const std::string& host, std::uint16_t port,
                                      std::chrono::milliseconds timeout);

/// Splits "host:port". Throws ParseError.
std::pair<std::string, std::uint16_t> parse_host_port(std::string_view text);

}  // namespace lirav
