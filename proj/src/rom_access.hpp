#pragma once

#include "lirav/device.hpp"
#include "lirav/quote.hpp"

namespace lirav {

// Private bridge between Device and the ROM routines. Callers hold the
// device mutex.
class RomAccess {
 public:
  static void boot(Device& d);
  static Measurement measure(const Device& d);
  static Quote sign_quote(Device& d, const Measurement& m);
  static Signature sign_transcript(Device& d, const Digest& transcript);
  static void store_response(Device& d, std::uint32_t offset, ByteView bytes);
  static std::unique_lock<std::mutex> lock(const Device& d) { return std::unique_lock(d.mutex_); }

 private:
  static void assert_gate(const Device& d);
  template <class Fn>
  static auto with_key(Device& d, Fn&& fn);
};

}  // namespace lirav
