#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "facegest/gateway/session.h"

namespace facegest::gateway {

// Newline-delimited JSON over TCP, one Session per connection. Each
// connection is served by its own thread; messages within a connection are
// handled strictly in arrival order.
class Server {
 public:
  explicit Server(std::optional<SessionConfig> default_config = std::nullopt, std::filesystem::path base_dir = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens. Port 0 picks a free port; returns the bound port.
  // Throws DataError when the address cannot be bound.
  std::uint16_t listen(const std::string& host, std::uint16_t port);
  // Accept loop on the calling thread until stop().
  void run();
  // Accept loop on a background thread.
  void start();
  void stop();

  std::uint16_t port() const { return port_; }

 private:
  void serve_connection(int fd);

  std::optional<SessionConfig> default_config_;
  std::filesystem::path base_dir_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::list<std::thread> workers_;
  std::list<int> client_fds_;
};

// "host:port" -> (host, port). Throws DataError on bad syntax.
std::pair<std::string, std::uint16_t> parse_listen_address(const std::string& address);

}  // namespace facegest::gateway
