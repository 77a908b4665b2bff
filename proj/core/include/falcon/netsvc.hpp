#pragma once

#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "falcon/dataset.hpp"
#include "falcon/parallel.hpp"
#include "falcon/wire.hpp"

namespace falcon::net {

enum class TransportErrorKind { ConnectionRefused, ResolveFailed, ConnectionClosed, Io, Protocol };

std::string_view to_string(TransportErrorKind kind) noexcept;

class TransportError : public std::runtime_error {
 public:
  TransportError(TransportErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  TransportErrorKind kind() const noexcept { return kind_; }

 private:
  TransportErrorKind kind_;
};

/// TCP front end over a SearchEngine. Each connection gets a reader that
/// dispatches every query as soon as its payload arrives and a writer that sends
/// records back in arrival order as they complete.
class SearchServer {
 public:
  SearchServer(std::shared_ptr<SearchEngine> engine, SearchParams defaults);
  ~SearchServer();

  SearchServer(const SearchServer&) = delete;
  SearchServer& operator=(const SearchServer&) = delete;

  /// Binds and starts accepting. Port 0 picks an ephemeral port; returns the bound port.
  std::uint16_t start(const std::string& host = "127.0.0.1", std::uint16_t port = 0);
  /// Stops accepting, shuts down open connections and joins all threads.
  void stop();

  std::uint16_t port() const noexcept { return port_; }
  bool running() const noexcept { return running_.load(); }
  std::uint64_t queries_served() const noexcept { return served_.load(); }

 private:
  struct Connection;

  void accept_loop();
  void handle(Connection& conn);
  void reap_finished();

  std::shared_ptr<SearchEngine> engine_;
  SearchParams defaults_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> served_{0};
  std::thread acceptor_;
  std::mutex conns_mu_;
  std::list<std::unique_ptr<Connection>> conns_;
};

/// Blocking client connection.
class Client {
 public:
  /// Throws TransportError(ConnectionRefused) if nothing listens on host:port.
  Client(const std::string& host, std::uint16_t port);
  ~Client();

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void send_bytes(std::span<const std::byte> bytes);
  void send_request(const wire::Request& request);
  /// Next response record, or nullopt when the server closed the connection
  /// cleanly at a record boundary. Throws TransportError on a torn record.
  std::optional<wire::Response> read_response();
  /// Half-closes the sending side.
  void finish_sending();

 private:
  int fd_ = -1;
};

struct BatchOutcome {
  /// Records received, in arrival order; may be shorter than the batch.
  std::vector<wire::Response> responses;
  /// Set when the connection failed before every record arrived.
  std::optional<TransportError> error;

  bool complete(std::size_t batch_size) const noexcept { return !error && responses.size() == batch_size; }
};

/// Sends one request holding every row of `queries` and collects the records.
/// Connection refusal throws; a mid-batch failure returns the partial records.
BatchOutcome client_query(const std::string& host, std::uint16_t port, const VectorSet& queries,
                          const SearchParams& params);

}  // namespace falcon::net
