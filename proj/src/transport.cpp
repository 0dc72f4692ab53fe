#include "lirav/transport.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>

#include "lirav/error.hpp"
#include "stream_endpoint.hpp"

namespace lirav {

namespace {

bool known_type(std::uint8_t t) {
  switch (static_cast<FrameType>(t)) {
    case FrameType::M1:
    case FrameType::M2:
    case FrameType::M3:
    case FrameType::Confirm:
    case FrameType::Error:
      return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(FrameType type) noexcept {
  switch (type) {
    case FrameType::M1: return "M1";
    case FrameType::M2: return "M2";
    case FrameType::M3: return "M3";
    case FrameType::Confirm: return "CONFIRM";
    case FrameType::Error: return "ERROR";
  }
  return "?";
}

std::string_view to_string(DecodeStatus status) noexcept {
  switch (status) {
    case DecodeStatus::Ok: return "Ok";
    case DecodeStatus::BadMagic: return "BadMagic";
    case DecodeStatus::BadVersion: return "BadVersion";
    case DecodeStatus::Oversize: return "Oversize";
    case DecodeStatus::Truncated: return "Truncated";
  }
  return "?";
}

Bytes encode_frame(FrameType type, ByteView payload) {
  if (payload.size() > kMaxFramePayload) throw Error(Errc::FrameError, "frame payload over 64 KiB");
  Bytes out;
  out.reserve(kFrameHeaderSize + payload.size());
  append(out, kFrameMagic);
  out.push_back(kFrameVersion);
  out.push_back(static_cast<std::uint8_t>(type));
  append_be32(out, static_cast<std::uint32_t>(payload.size()));
  append(out, payload);
  return out;
}

DecodeResult decode_frame(ByteView bytes) noexcept {
  DecodeResult r;
  // Reject as early as the available prefix allows.
  const std::size_t magic_len = std::min(bytes.size(), kFrameMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + magic_len, kFrameMagic.begin())) {
    r.status = DecodeStatus::BadMagic;
    return r;
  }
  if (bytes.size() > 4 && bytes[4] != kFrameVersion) {
    r.status = DecodeStatus::BadVersion;
    return r;
  }
  if (bytes.size() > 5 && !known_type(bytes[5])) {
    r.status = DecodeStatus::BadMagic;
    return r;
  }
  if (bytes.size() < kFrameHeaderSize) return r;
  const std::uint32_t len = load_be32(bytes.subspan(6, 4));
  if (len > kMaxFramePayload) {
    r.status = DecodeStatus::Oversize;
    return r;
  }
  if (bytes.size() - kFrameHeaderSize < len) return r;
  try {
    r.frame.type = static_cast<FrameType>(bytes[5]);
    r.frame.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.begin() + kFrameHeaderSize + len);
  } catch (...) {
    r.status = DecodeStatus::Oversize;
    return r;
  }
  r.status = DecodeStatus::Ok;
  r.consumed = kFrameHeaderSize + len;
  return r;
}

void StreamEndpoint::send(FrameType type, ByteView payload) { write_all(encode_frame(type, payload)); }

Frame StreamEndpoint::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (!buffer_.empty()) {
      DecodeResult r = decode_frame(buffer_);
      if (r.status == DecodeStatus::Ok) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
        return std::move(r.frame);
      }
      if (r.status != DecodeStatus::Truncated) {
        throw Error(Errc::FrameError, "corrupt frame stream: " + std::string(to_string(r.status)));
      }
    }
    append(buffer_, read_some(deadline));
  }
}

namespace {

struct Pipe {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::uint8_t> data;
  bool closed = false;

  void close() {
    {
      std::lock_guard lock(mutex);
      closed = true;
    }
    cv.notify_all();
  }
};

struct Shared {
  Pipe ab;
  Pipe ba;
  std::mutex ab_hook_mutex;
  std::mutex ba_hook_mutex;
  DeliveryHook ab_hook;
  DeliveryHook ba_hook;
};

class MemoryEndpoint final : public StreamEndpoint {
 public:
  MemoryEndpoint(std::shared_ptr<Shared> shared, bool is_a) : shared_(std::move(shared)), is_a_(is_a) {}
  ~MemoryEndpoint() override { close(); }

  void close() override {
    shared_->ab.close();
    shared_->ba.close();
  }

 protected:
  void write_all(Bytes frame) override {
    Pipe& out = is_a_ ? shared_->ab : shared_->ba;
    {
      std::lock_guard lock(out.mutex);
      if (out.closed) throw Error(Errc::ChannelClosed, "channel closed");
    }
    std::vector<Bytes> chunks;
    {
      std::lock_guard lock(is_a_ ? shared_->ab_hook_mutex : shared_->ba_hook_mutex);
      const DeliveryHook& hook = is_a_ ? shared_->ab_hook : shared_->ba_hook;
      if (hook) chunks = hook(std::move(frame));
      else chunks.push_back(std::move(frame));
    }
    {
      std::lock_guard lock(out.mutex);
      for (const Bytes& c : chunks) out.data.insert(out.data.end(), c.begin(), c.end());
    }
    out.cv.notify_all();
  }

  Bytes read_some(std::chrono::steady_clock::time_point deadline) override {
    Pipe& in = is_a_ ? shared_->ba : shared_->ab;
    std::unique_lock lock(in.mutex);
    if (!in.cv.wait_until(lock, deadline, [&] { return !in.data.empty() || in.closed; })) {
      throw Error(Errc::Timeout, "receive timed out");
    }
    if (in.data.empty()) throw Error(Errc::ChannelClosed, "channel closed");
    Bytes out(in.data.begin(), in.data.end());
    in.data.clear();
    return out;
  }

 private:
  std::shared_ptr<Shared> shared_;
  bool is_a_;
};

}  // namespace

std::pair<std::unique_ptr<Endpoint>, std::unique_ptr<Endpoint>> channel_pair(ChannelHooks hooks) {
  auto shared = std::make_shared<Shared>();
  shared->ab_hook = std::move(hooks.a_to_b);
  shared->ba_hook = std::move(hooks.b_to_a);
  return {std::make_unique<MemoryEndpoint>(shared, true), std::make_unique<MemoryEndpoint>(shared, false)};
}

namespace hooks {

DeliveryHook drop_all() {
  return [](Bytes) { return std::vector<Bytes>{}; };
}

DeliveryHook drop_nth(std::size_t n) {
  return [n, i = std::size_t{0}](Bytes f) mutable {
    std::vector<Bytes> out;
    if (i++ != n) out.push_back(std::move(f));
    return out;
  };
}

DeliveryHook duplicate_nth(std::size_t n) {
  return [n, i = std::size_t{0}](Bytes f) mutable {
    std::vector<Bytes> out{f};
    if (i++ == n) out.push_back(std::move(f));
    return out;
  };
}

DeliveryHook swap_with_next(std::size_t n) {
  return [n, i = std::size_t{0}, held = std::optional<Bytes>{}](Bytes f) mutable {
    std::vector<Bytes> out;
    if (i++ == n) {
      held = std::move(f);
      return out;
    }
    out.push_back(std::move(f));
    if (held) {
      out.push_back(std::move(*held));
      held.reset();
    }
    return out;
  };
}

DeliveryHook mutate_nth(std::size_t n, std::function<void(Bytes&)> mutate) {
  return [n, mutate = std::move(mutate), i = std::size_t{0}](Bytes f) mutable {
    if (i++ == n) mutate(f);
    return std::vector<Bytes>{std::move(f)};
  };
}

DeliveryHook record(std::shared_ptr<std::vector<Bytes>> log) {
  return [log = std::move(log)](Bytes f) {
    log->push_back(f);
    return std::vector<Bytes>{std::move(f)};
  };
}

DeliveryHook chain(DeliveryHook first, DeliveryHook second) {
  return [first = std::move(first), second = std::move(second)](Bytes f) mutable {
    std::vector<Bytes> out;
    for (Bytes& mid : first(std::move(f))) {
      for (Bytes& b : second(std::move(mid))) out.push_back(std::move(b));
    }
    return out;
  };
}

}  // namespace hooks

}  // namespace lirav
