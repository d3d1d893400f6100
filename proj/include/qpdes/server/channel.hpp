#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qpdes/server/server_core.hpp"

namespace qpdes::server {

/// Blocking request/response pipe to the global QSM carrying message text.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual std::string roundtrip(const std::string& text) = 0;
};

/// Hands messages straight to a server core in the caller's thread.
class InProcessChannel final : public Channel {
 public:
  explicit InProcessChannel(ServerCore& core) : core_(core) {}
  std::string roundtrip(const std::string& text) override { return core_.handle_text(text); }

 private:
  ServerCore& core_;
};

/// Length-prefixed frames over one TCP connection.
class TcpChannel final : public Channel {
 public:
  /// Throws ServerUnavailable when the connection cannot be made.
  TcpChannel(const std::string& host, std::uint16_t port);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  std::string roundtrip(const std::string& text) override;

 private:
  int fd_ = -1;
};

/// Serves a core over TCP, one thread per session. Stops accepting after a
/// TERMINATE request or stop(); open sessions finish when their client closes.
class TcpServer {
 public:
  /// Port 0 picks an ephemeral port. Throws BindFailure.
  TcpServer(ServerCore& core, const std::string& host, std::uint16_t port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const { return port_; }
  void stop();
  std::size_t sessions_accepted() const { return accepted_.load(); }

 private:
  void accept_loop();
  void session(int fd);

  ServerCore& core_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<std::size_t> accepted_{0};
  std::thread acceptor_;
  std::mutex sessions_mu_;
  std::vector<std::thread> sessions_;
  std::vector<int> session_fds_;
};

/// Where the global QSM lives: "inproc" or "tcp://host:port".
struct Endpoint {
  enum class Kind { kInProcess, kTcp };
  Kind kind = Kind::kInProcess;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// Throws ValidationError.
  static Endpoint parse(const std::string& text);
  /// QPDES_QSM_ENDPOINT, when set, replaces `configured`.
  static Endpoint resolve(const std::string& configured);
  std::string str() const;
};

/// Frame I/O helpers shared by client and server. Return false on EOF.
bool write_frame(int fd, const std::string& text);
bool read_frame(int fd, std::string& text);

}  // namespace qpdes::server
