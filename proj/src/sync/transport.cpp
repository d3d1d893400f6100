#include "qpdes/sync/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "qpdes/core/error.hpp"

namespace qpdes::sync {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(p[i])} << (8 * i);
  return v;
}

[[noreturn]] void transport_fail(const std::string& what) {
  fail(ErrorCode::kTransportFailure, what + ": " + std::strerror(errno));
}

}  // namespace

InHostHub::InHostHub(std::size_t workers)
    : n_(workers),
      gate_(static_cast<std::ptrdiff_t>(workers)),
      slots_(workers, std::vector<std::string>(workers)),
      mins_(workers, SimTime::infinity()) {}

ExchangeResult InHostTransport::exchange(std::vector<std::string> outgoing, SimTime local_min) {
  ExchangeResult res;
  auto t = Clock::now();
  for (std::size_t w = 0; w < hub_.n_; ++w) {
    if (w != rank_) hub_.slots_[rank_][w] = std::move(outgoing[w]);
  }
  hub_.mins_[rank_] = local_min;
  res.transfer_seconds += since(t);

  t = Clock::now();
  hub_.gate_.arrive_and_wait();
  res.wait_seconds += since(t);

  t = Clock::now();
  res.incoming.resize(hub_.n_);
  for (std::size_t w = 0; w < hub_.n_; ++w) {
    if (w != rank_) res.incoming[w] = std::move(hub_.slots_[w][rank_]);
  }
  res.mins = hub_.mins_;
  res.transfer_seconds += since(t);

  // Slots and mins are rewritten next round; nobody may start before all have read.
  t = Clock::now();
  hub_.gate_.arrive_and_wait();
  res.wait_seconds += since(t);
  return res;
}

double InHostTransport::barrier() {
  const auto t = Clock::now();
  hub_.gate_.arrive_and_wait();
  return since(t);
}

SocketTransport::SocketTransport(WorkerId rank, std::size_t size, std::vector<std::uint16_t>& ports,
                                 std::barrier<>& startup)
    : rank_(rank), n_(size), peers_(size, -1) {
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) transport_fail("socket");
  int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(ports[rank]);
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(lfd, 64) != 0) {
    ::close(lfd);
    transport_fail("bind worker listener");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &len);
  ports[rank] = ntohs(addr.sin_port);
  startup.arrive_and_wait();

  // Lower ranks accept, higher ranks connect; each connector announces its rank.
  for (std::size_t peer = 0; peer < rank; ++peer) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in to{};
    to.sin_family = AF_INET;
    to.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    to.sin_port = htons(ports[peer]);
    if (fd < 0 || ::connect(fd, reinterpret_cast<sockaddr*>(&to), sizeof(to)) != 0) transport_fail("connect to peer");
    const std::uint32_t me = rank;
    if (::send(fd, &me, sizeof(me), MSG_NOSIGNAL) != sizeof(me)) transport_fail("announce rank");
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    peers_[peer] = fd;
  }
  for (std::size_t k = rank + 1; k < size; ++k) {
    const int fd = ::accept(lfd, nullptr, nullptr);
    if (fd < 0) transport_fail("accept peer");
    std::uint32_t who = 0;
    if (::recv(fd, &who, sizeof(who), MSG_WAITALL) != sizeof(who) || who >= size || who <= rank) {
      fail(ErrorCode::kTransportFailure, "bad peer announcement");
    }
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    peers_[who] = fd;
  }
  ::close(lfd);
  for (int fd : peers_) {
    if (fd >= 0) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
  }
}

SocketTransport::~SocketTransport() {
  for (int fd : peers_) {
    if (fd >= 0) ::close(fd);
  }
}

void SocketTransport::all_to_all(std::vector<std::string>& send, std::vector<std::string>& recv) {
  // Frames are u64 length + body. Sends and receives interleave through poll
  // so large payloads cannot deadlock on full socket buffers.
  std::vector<std::string> out(n_);
  std::vector<std::size_t> sent(n_, 0);
  std::vector<std::string> header(n_);
  std::vector<std::uint64_t> want(n_, 0);
  std::vector<bool> have_len(n_, false), done_in(n_, false), done_out(n_, false);
  recv.assign(n_, {});
  std::size_t remaining = 0;
  for (std::size_t w = 0; w < n_; ++w) {
    if (w == rank_) continue;
    put_u64(out[w], send[w].size());
    out[w] += send[w];
    remaining += 2;
  }
  std::vector<pollfd> fds;
  while (remaining > 0) {
    fds.clear();
    for (std::size_t w = 0; w < n_; ++w) {
      if (w == rank_ || (done_in[w] && done_out[w])) continue;
      short ev = 0;
      if (!done_in[w]) ev |= POLLIN;
      if (!done_out[w]) ev |= POLLOUT;
      fds.push_back(pollfd{peers_[w], ev, 0});
    }
    if (::poll(fds.data(), fds.size(), 60000) <= 0) transport_fail("poll peers");
    for (const pollfd& p : fds) {
      std::size_t w = 0;
      while (peers_[w] != p.fd) ++w;
      if ((p.revents & (POLLERR | POLLHUP)) != 0 && (p.revents & POLLIN) == 0) {
        fail(ErrorCode::kTransportFailure, "peer " + std::to_string(w) + " closed");
      }
      if ((p.revents & POLLOUT) != 0 && !done_out[w]) {
        const ssize_t n = ::send(p.fd, out[w].data() + sent[w], out[w].size() - sent[w], MSG_NOSIGNAL);
        if (n < 0 && errno != EAGAIN && errno != EINTR) transport_fail("send to peer");
        if (n > 0) sent[w] += static_cast<std::size_t>(n);
        if (sent[w] == out[w].size()) {
          done_out[w] = true;
          --remaining;
        }
      }
      if ((p.revents & POLLIN) != 0 && !done_in[w]) {
        char buf[65536];
        const std::size_t cap = have_len[w] ? std::min<std::size_t>(sizeof(buf), want[w] - recv[w].size())
                                            : 8 - header[w].size();
        const ssize_t n = ::recv(p.fd, buf, cap, 0);
        if (n == 0) fail(ErrorCode::kTransportFailure, "peer " + std::to_string(w) + " closed");
        if (n < 0 && errno != EAGAIN && errno != EINTR) transport_fail("recv from peer");
        if (n > 0) {
          if (!have_len[w]) {
            header[w].append(buf, static_cast<std::size_t>(n));
            if (header[w].size() == 8) {
              want[w] = get_u64(header[w].data());
              have_len[w] = true;
            }
          } else {
            recv[w].append(buf, static_cast<std::size_t>(n));
          }
        }
        if (have_len[w] && recv[w].size() == want[w]) {
          done_in[w] = true;
          --remaining;
        }
      }
    }
  }
}

ExchangeResult SocketTransport::exchange(std::vector<std::string> outgoing, SimTime local_min) {
  ExchangeResult res;
  const auto t = Clock::now();
  for (std::size_t w = 0; w < n_; ++w) {
    std::string framed;
    put_u64(framed, static_cast<std::uint64_t>(local_min.ticks()));
    framed += outgoing[w];
    outgoing[w] = std::move(framed);
  }
  std::vector<std::string> recv;
  all_to_all(outgoing, recv);
  res.incoming.resize(n_);
  res.mins.assign(n_, local_min);
  for (std::size_t w = 0; w < n_; ++w) {
    if (w == rank_) continue;
    if (recv[w].size() < 8) fail(ErrorCode::kTransportFailure, "short exchange frame");
    res.mins[w] = SimTime(static_cast<SimTime::rep>(get_u64(recv[w].data())));
    res.incoming[w] = recv[w].substr(8);
  }
  // Sockets do not separate waiting from moving bytes; the whole call counts as transfer.
  res.transfer_seconds = since(t);
  return res;
}

double SocketTransport::barrier() {
  const auto t = Clock::now();
  std::vector<std::string> empty(n_), recv;
  all_to_all(empty, recv);
  return since(t);
}

}  // namespace qpdes::sync
