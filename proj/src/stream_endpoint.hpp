#pragma once

#include <chrono>

#include "lirav/transport.hpp"

namespace lirav {

// Frame reassembly over a byte stream; subclasses supply the raw I/O.
class StreamEndpoint : public Endpoint {
 public:
  void send(FrameType type, ByteView payload) override;
  Frame receive(std::chrono::milliseconds timeout) override;

 protected:
  virtual void write_all(Bytes bytes) = 0;
  /// Blocks until some bytes arrive. Throws Timeout or ChannelClosed.
  virtual Bytes read_some(std::chrono::steady_clock::time_point deadline) = 0;

 private:
  Bytes buffer_;
};

}  // namespace lirav
