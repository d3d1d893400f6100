#include "qpdes/server/channel.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "qpdes/core/error.hpp"

namespace qpdes::server {

namespace {

bool write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, char* data, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

bool write_frame(int fd, const std::string& text) {
  const std::string f = qsm::frame(text);
  return write_all(fd, f.data(), f.size());
}

bool read_frame(int fd, std::string& text) {
  unsigned char header[4];
  if (!read_all(fd, reinterpret_cast<char*>(header), 4)) return false;
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                          (std::uint32_t{header[2]} << 8) | std::uint32_t{header[3]};
  if (n > qsm::kMaxFrameBytes) return false;
  text.resize(n);
  return read_all(fd, text.data(), n);
}

TcpChannel::TcpChannel(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr) {
    fail(ErrorCode::kServerUnavailable, "cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    fail(ErrorCode::kServerUnavailable, "cannot connect to " + host + ":" + service + ": " + std::strerror(errno));
  }
  set_nodelay(fd_);
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

std::string TcpChannel::roundtrip(const std::string& text) {
  std::string reply;
  if (!write_frame(fd_, text) || !read_frame(fd_, reply)) {
    fail(ErrorCode::kServerUnavailable, "connection to global QSM lost");
  }
  return reply;
}

TcpServer::TcpServer(ServerCore& core, const std::string& host, std::uint16_t port) : core_(core) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail(ErrorCode::kBindFailure, std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    fail(ErrorCode::kBindFailure, "bad listen address " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(listen_fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    fail(ErrorCode::kBindFailure, host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() {
  stop();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> sessions;
  std::vector<int> fds;
  {
    std::lock_guard lock(sessions_mu_);
    for (int fd : session_fds_) ::shutdown(fd, SHUT_RDWR);
    sessions.swap(sessions_);
    fds.swap(session_fds_);
  }
  for (auto& t : sessions) t.join();
  for (int fd : fds) ::close(fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::stop() { stop_.store(true); }

void TcpServer::accept_loop() {
  while (!stop_.load() && !core_.terminated()) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    set_nodelay(fd);
    accepted_.fetch_add(1);
    std::lock_guard lock(sessions_mu_);
    session_fds_.push_back(fd);
    sessions_.emplace_back([this, fd] { session(fd); });
  }
}

void TcpServer::session(int fd) {
  std::string request;
  while (read_frame(fd, request)) {
    if (!write_frame(fd, core_.handle_text(request))) break;
  }
  ::shutdown(fd, SHUT_RDWR);
}

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint e;
  if (text.empty() || text == "inproc") return e;
  const std::string prefix = "tcp://";
  if (text.rfind(prefix, 0) != 0) fail(ErrorCode::kValidationError, "qsm endpoint: expected inproc or tcp://host:port");
  const std::string rest = text.substr(prefix.size());
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0) fail(ErrorCode::kValidationError, "qsm endpoint: missing port");
  e.kind = Kind::kTcp;
  e.host = rest.substr(0, colon);
  char* end = nullptr;
  const long port = std::strtol(rest.c_str() + colon + 1, &end, 10);
  if (*end != '\0' || port < 0 || port > 65535) fail(ErrorCode::kValidationError, "qsm endpoint: bad port");
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

Endpoint Endpoint::resolve(const std::string& configured) {
  const char* env = std::getenv("QPDES_QSM_ENDPOINT");
  return parse(env != nullptr && *env != '\0' ? std::string(env) : configured);
}

std::string Endpoint::str() const {
  if (kind == Kind::kInProcess) return "inproc";
  return "tcp://" + host + ":" + std::to_string(port);
}

}  // namespace qpdes::server
