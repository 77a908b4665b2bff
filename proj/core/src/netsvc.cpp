#include "falcon/netsvc.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>

#include "falcon/binary_io.hpp"

namespace falcon::net {

std::string_view to_string(TransportErrorKind kind) noexcept {
  switch (kind) {
    case TransportErrorKind::ConnectionRefused:
      return "connection refused";
    case TransportErrorKind::ResolveFailed:
      return "cannot resolve host";
    case TransportErrorKind::ConnectionClosed:
      return "connection closed";
    case TransportErrorKind::Io:
      return "i/o error";
    case TransportErrorKind::Protocol:
      return "protocol error";
  }
  return "unknown";
}

namespace {

enum class ReadStatus { Full, Eof, Torn };

// Eof only if the peer closed before the first byte.
ReadStatus read_exact(int fd, std::byte* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r > 0) {
      got += static_cast<std::size_t>(r);
    } else if (r == 0) {
      return got == 0 ? ReadStatus::Eof : ReadStatus::Torn;
    } else if (errno != EINTR) {
      return got == 0 && errno == ECONNRESET ? ReadStatus::Eof : ReadStatus::Torn;
    }
  }
  return ReadStatus::Full;
}

bool write_all(int fd, const std::byte* buf, std::size_t n) {
  std::size_t sent = 0;
  while (sent < n) {
    const ssize_t r = ::send(fd, buf + sent, n - sent, MSG_NOSIGNAL);
    if (r > 0) {
      sent += static_cast<std::size_t>(r);
    } else if (r < 0 && errno != EINTR) {
      return false;
    }
  }
  return true;
}

bool drain(int fd, std::size_t n) {
  std::byte scratch[4096];
  while (n > 0) {
    const std::size_t chunk = std::min(n, sizeof scratch);
    if (read_exact(fd, scratch, chunk) != ReadStatus::Full) return false;
    n -= chunk;
  }
  return true;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

sockaddr_in resolve(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res);
  if (rc != 0 || res == nullptr) {
    throw TransportError(TransportErrorKind::ResolveFailed, "cannot resolve '" + host + "': " + gai_strerror(rc));
  }
  sockaddr_in addr{};
  std::memcpy(&addr, res->ai_addr, sizeof addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(port);
  return addr;
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

// ---------------------------------------------------------------- server

struct SearchServer::Connection {
  int fd = -1;
  std::thread thread;
  std::atomic<bool> done{false};
};

SearchServer::SearchServer(std::shared_ptr<SearchEngine> engine, SearchParams defaults)
    : engine_(std::move(engine)), defaults_(defaults) {
  if (!engine_) throw std::invalid_argument("SearchServer: null engine");
  defaults_.validate();
}

SearchServer::~SearchServer() { stop(); }

std::uint16_t SearchServer::start(const std::string& host, std::uint16_t port) {
  if (running_) throw std::logic_error("SearchServer::start: already running");
  sockaddr_in addr = resolve(host, port);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError(TransportErrorKind::Io, errno_text("socket"));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
    const std::string msg = errno_text("bind/listen");
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw TransportError(TransportErrorKind::Io, msg);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void SearchServer::stop() {
  if (!running_.exchange(false)) return;
  // shutdown() wakes a blocked accept()/recv() on Linux.
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  std::list<std::unique_ptr<Connection>> conns;
  {
    std::lock_guard lock(conns_mu_);
    conns.swap(conns_);
  }
  for (auto& c : conns) ::shutdown(c->fd, SHUT_RDWR);
  for (auto& c : conns) {
    if (c->thread.joinable()) c->thread.join();
  }
}

void SearchServer::reap_finished() {
  std::lock_guard lock(conns_mu_);
  for (auto it = conns_.begin(); it != conns_.end();) {
    if ((*it)->done) {
      (*it)->thread.join();
      it = conns_.erase(it);
    } else {
      ++it;
    }
  }
}

void SearchServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    if (!running_) {
      ::close(fd);
      break;
    }
    set_nodelay(fd);
    reap_finished();
    auto conn = std::make_unique<Connection>();
    conn->fd = fd;
    Connection& ref = *conn;
    std::lock_guard lock(conns_mu_);
    conns_.push_back(std::move(conn));
    ref.thread = std::thread([this, &ref] {
      handle(ref);
      ref.done = true;
    });
  }
}

void SearchServer::handle(Connection& conn) {
  using Produce = std::function<wire::Response()>;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Produce> pending;
  bool closed = false;

  auto push = [&](Produce p) {
    {
      std::lock_guard lock(mu);
      pending.push_back(std::move(p));
    }
    cv.notify_one();
  };
  auto immediate = [](std::uint32_t index, wire::Status status) {
    return [=] { return wire::Response{index, status, {}}; };
  };

  std::thread writer([&] {
    bool broken = false;
    std::vector<std::byte> buf;
    for (;;) {
      Produce next;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return closed || !pending.empty(); });
        if (pending.empty()) return;
        next = std::move(pending.front());
        pending.pop_front();
      }
      const wire::Response resp = next();
      if (broken) continue;
      buf.clear();
      wire::append_response(buf, resp);
      if (!write_all(conn.fd, buf.data(), buf.size())) broken = true;
    }
  });

  const std::size_t index_dim = engine_->index().dim();
  std::byte header[wire::kRequestHeaderBytes];
  while (running_) {
    if (read_exact(conn.fd, header, sizeof header) != ReadStatus::Full) break;
    wire::RequestHeader h;
    try {
      h = wire::decode_request_header(header);
    } catch (const wire::WireError& e) {
      // The stream cannot be resynchronized; report once and close.
      push(immediate(wire::kNoQuery, e.status()));
      break;
    }
    wire::Status batch_status = wire::Status::Ok;
    SearchParams params;
    try {
      params = wire::resolve_params(h, defaults_);
      if (params.k > engine_->index().size()) throw wire::WireError(wire::Status::BadParams, "k exceeds index size");
    } catch (const wire::WireError& e) {
      batch_status = e.status();
    }
    if (batch_status == wire::Status::Ok && h.dim != index_dim) batch_status = wire::Status::DimMismatch;

    if (batch_status != wire::Status::Ok) {
      if (!drain(conn.fd, std::size_t{h.batch_size} * h.dim * 4)) break;
      for (std::uint32_t i = 0; i < h.batch_size; ++i) push(immediate(i, batch_status));
      continue;
    }

    bool torn = false;
    std::vector<std::byte> payload(std::size_t{h.dim} * 4);
    for (std::uint32_t i = 0; i < h.batch_size; ++i) {
      if (read_exact(conn.fd, payload.data(), payload.size()) != ReadStatus::Full) {
        torn = true;
        break;
      }
      std::vector<float> query(h.dim);
      for (std::size_t d = 0; d < h.dim; ++d) query[d] = io::load_f32(payload.data() + d * 4);
      std::shared_future<SearchResult> fut = engine_->submit(std::move(query), params).share();
      push([this, i, fut] {
        wire::Response resp{i, wire::Status::Ok, {}};
        try {
          resp.neighbors = fut.get().neighbors;
          served_.fetch_add(1);
        } catch (const std::exception&) {
          resp.status = wire::Status::InternalError;
        }
        return resp;
      });
    }
    if (torn) break;
  }

  {
    std::lock_guard lock(mu);
    closed = true;
  }
  cv.notify_one();
  writer.join();
  // Send FIN first and swallow whatever the peer still sends, so unread input
  // does not turn the close into a reset that discards our last records.
  ::shutdown(conn.fd, SHUT_WR);
  timeval tv{0, 200000};
  ::setsockopt(conn.fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  std::byte scratch[4096];
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(2);
  while (running_ && std::chrono::steady_clock::now() < deadline &&
         ::recv(conn.fd, scratch, sizeof scratch, 0) > 0) {
  }
  ::close(conn.fd);
}

// ---------------------------------------------------------------- client

Client::Client(const std::string& host, std::uint16_t port) {
  const sockaddr_in addr = resolve(host, port);
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(TransportErrorKind::Io, errno_text("socket"));
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) < 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    const std::string where = host + ":" + std::to_string(port);
    if (err == ECONNREFUSED) {
      throw TransportError(TransportErrorKind::ConnectionRefused, "connection refused by " + where);
    }
    throw TransportError(TransportErrorKind::Io, "connect to " + where + ": " + std::strerror(err));
  }
  set_nodelay(fd_);
}

Client::~Client() {
  if (fd_ >= 0) ::close(fd_);
}

void Client::send_bytes(std::span<const std::byte> bytes) {
  if (!write_all(fd_, bytes.data(), bytes.size())) {
    throw TransportError(errno == EPIPE || errno == ECONNRESET ? TransportErrorKind::ConnectionClosed
                                                               : TransportErrorKind::Io,
                         errno_text("send"));
  }
}

void Client::send_request(const wire::Request& request) { send_bytes(wire::encode_request(request)); }

void Client::finish_sending() { ::shutdown(fd_, SHUT_WR); }

std::optional<wire::Response> Client::read_response() {
  std::byte head[wire::kResponseHeaderBytes];
  switch (read_exact(fd_, head, sizeof head)) {
    case ReadStatus::Eof:
      return std::nullopt;
    case ReadStatus::Torn:
      throw TransportError(TransportErrorKind::ConnectionClosed, "connection closed inside a response record");
    case ReadStatus::Full:
      break;
  }
  const std::uint32_t count = io::load_u32(head + 8);
  std::vector<std::byte> record(head, head + sizeof head);
  record.resize(sizeof head + std::size_t{count} * 8);
  if (count > 0 && read_exact(fd_, record.data() + sizeof head, record.size() - sizeof head) != ReadStatus::Full) {
    throw TransportError(TransportErrorKind::ConnectionClosed, "connection closed inside a response record");
  }
  try {
    return wire::decode_response(record);
  } catch (const wire::WireError& e) {
    throw TransportError(TransportErrorKind::Protocol, e.what());
  }
}

BatchOutcome client_query(const std::string& host, std::uint16_t port, const VectorSet& queries,
                          const SearchParams& params) {
  Client client(host, port);
  wire::Request req;
  req.header.k = static_cast<std::uint32_t>(params.k);
  req.header.l = static_cast<std::uint32_t>(params.l);
  req.header.algorithm = wire::algorithm_code(params.algorithm);
  req.header.mg = static_cast<std::uint32_t>(params.mg);
  req.header.mc = static_cast<std::uint32_t>(params.mc);
  req.header.batch_size = static_cast<std::uint32_t>(queries.count);
  req.header.dim = static_cast<std::uint32_t>(queries.dim);
  req.queries = queries.data;

  BatchOutcome out;
  try {
    client.send_request(req);
    client.finish_sending();
    while (out.responses.size() < queries.count) {
      auto resp = client.read_response();
      if (!resp) {
        throw TransportError(TransportErrorKind::ConnectionClosed,
                             "server closed the connection after " + std::to_string(out.responses.size()) + " of " +
                                 std::to_string(queries.count) + " responses");
      }
      const bool fatal = resp->query_index == wire::kNoQuery;
      const wire::Status status = resp->status;
      out.responses.push_back(std::move(*resp));
      if (fatal) {
        throw TransportError(TransportErrorKind::Protocol,
                             "server rejected the request: " + std::string(wire::to_string(status)));
      }
    }
  } catch (const TransportError& e) {
    out.error = e;
  }
  return out;
}

}  // namespace falcon::net
