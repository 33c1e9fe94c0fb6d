#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "rucs/service.hpp"

namespace httplib {
class Server;
}

namespace rucs {

// HTTP/1.1 front end for a Service. JSON endpoints map 1:1 onto
// Service::handle; GET /api/trips/{id}/listen streams newline-delimited
// envelopes until the client disconnects or the trip completes.
class HttpServer {
 public:
  struct Options {
    std::string bind_address = "127.0.0.1";
    // 0 picks a free port.
    int port = 0;
    std::size_t threads = 64;
    // Idle streams emit an empty line this often so dead peers are noticed.
    std::chrono::milliseconds stream_heartbeat{1000};
  };

  HttpServer(Service& service, Options options);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts serving on a background thread. Returns the bound port.
  Expected<int> start();
  // Binds and serves on the calling thread until stop().
  Status run();
  void stop();

  [[nodiscard]] int port() const { return port_.load(); }
  [[nodiscard]] std::string base_url() const;

 private:
  void install_routes();

  Service& service_;
  Options options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<int> port_{0};
};

}  // namespace rucs
