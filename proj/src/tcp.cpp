#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <thread>

#include "lirav/error.hpp"
#include "lirav/transport.hpp"
#include "stream_endpoint.hpp"

namespace lirav {

namespace {

using Clock = std::chrono::steady_clock;

Error io_error(const std::string& what) { return Error(Errc::Io, what + ": " + std::strerror(errno)); }

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left < 0 ? 0 : static_cast<int>(left);
}

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) freeaddrinfo(head);
  }
};

AddrInfo resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  AddrInfo info;
  const std::string service = std::to_string(port);
  int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &info.head);
  if (rc != 0) throw Error(Errc::Io, "cannot resolve " + host + ": " + gai_strerror(rc));
  return info;
}

class TcpEndpoint final : public StreamEndpoint {
 public:
  explicit TcpEndpoint(int fd) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpEndpoint() override { close(); }

  void close() override {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 protected:
  void write_all(Bytes bytes) override {
    if (fd_ < 0) throw Error(Errc::ChannelClosed, "socket closed");
    std::size_t off = 0;
    while (off < bytes.size()) {
      ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EPIPE || errno == ECONNRESET) throw Error(Errc::ChannelClosed, "peer closed the connection");
        throw io_error("send");
      }
      off += static_cast<std::size_t>(n);
    }
  }

  Bytes read_some(Clock::time_point deadline) override {
    if (fd_ < 0) throw Error(Errc::ChannelClosed, "socket closed");
    for (;;) {
      pollfd p{fd_, POLLIN, 0};
      int rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw io_error("poll");
      }
      if (rc == 0) throw Error(Errc::Timeout, "receive timed out");
      Bytes buf(4096);
      ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        if (errno == ECONNRESET) throw Error(Errc::ChannelClosed, "connection reset");
        throw io_error("recv");
      }
      if (n == 0) throw Error(Errc::ChannelClosed, "peer closed the connection");
      buf.resize(static_cast<std::size_t>(n));
      return buf;
    }
  }

 private:
  int fd_;
};

}  // namespace

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
  AddrInfo info = resolve(host, port, true);
  for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  if (fd_ < 0) throw io_error("cannot listen on " + host + ":" + std::to_string(port));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                                     : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Endpoint> TcpListener::accept(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    pollfd p{fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw io_error("poll");
    }
    if (rc == 0) throw Error(Errc::Timeout, "no connection before the timeout");
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      throw io_error("accept");
    }
    return std::make_unique<TcpEndpoint>(fd);
  }
}

std::unique_ptr<Endpoint> tcp_connect(const std::string& host, std::uint16_t port, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    AddrInfo info = resolve(host, port, false);
    for (addrinfo* ai = info.head; ai; ai = ai->ai_next) {
      int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) return std::make_unique<TcpEndpoint>(fd);
      ::close(fd);
    }
    if (Clock::now() >= deadline) {
      throw Error(Errc::Timeout, "could not connect to " + host + ":" + std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

std::pair<std::string, std::uint16_t> parse_host_port(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw Error(Errc::ParseError, "expected host:port");
  std::string_view host = text.substr(0, colon);
  std::string_view port_text = text.substr(colon + 1);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty()) throw Error(Errc::ParseError, "empty host in '" + std::string(text) + "'");
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (port_text.empty() || ec != std::errc() || ptr != port_text.data() + port_text.size() || port > 65535) {
    throw Error(Errc::ParseError, "invalid port '" + std::string(port_text) + "'");
  }
  return {std::string(host), static_cast<std::uint16_t>(port)};
}

}  // namespace lirav
