#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "rucs/clock.hpp"
#include "rucs/envelope.hpp"
#include "rucs/result.hpp"
#include "rucs/sim/scenario.hpp"

namespace httplib {
class Client;
}

namespace rucs::sim {

struct Reply {
  int status = 0;
  nlohmann::json body;
  Timestamp sent_at;
  Timestamp received_at;
  double rtt_s = 0.0;
  double server_processing_s = 0.0;

  [[nodiscard]] bool ok() const { return status >= 200 && status < 300; }
};

// Blocking JSON client for one simulated vehicle. Not thread-safe; each
// vehicle owns one. The optional latency model sleeps inside the timed
// window before each request goes out, standing in for a cellular link.
class ServiceClient {
 public:
  ServiceClient(std::string base_url, LatencyProfile latency = {}, std::uint64_t seed = 0);
  ~ServiceClient();

  ServiceClient(const ServiceClient&) = delete;
  ServiceClient& operator=(const ServiceClient&) = delete;

  void set_token(std::string token) { token_ = std::move(token); }

  // Transport failures come back as ServiceUnreachable; HTTP errors are
  // returned as a Reply with the status set.
  Expected<Reply> get(const std::string& path);
  Expected<Reply> post(const std::string& path, const nlohmann::json& body);

  [[nodiscard]] const std::string& base_url() const { return base_url_; }

 private:
  double injected_delay_ms();
  template <typename Send>
  Expected<Reply> timed(Send&& send);

  std::string base_url_;
  LatencyProfile latency_;
  std::mt19937_64 rng_;
  std::string token_;
  std::unique_ptr<httplib::Client> http_;
  SystemClock clock_;
};

// Returns once GET /healthz answers 200 or after `attempts` failures.
Status wait_healthy(const std::string& base_url, int attempts = 1);

// Reads a trip's listen stream on a background thread and hands every
// envelope to the callback. Ends when the service closes the stream (trip
// completed) or on stop().
class ListenStream {
 public:
  using Callback = std::function<void(const Envelope&)>;

  ListenStream(std::string base_url, std::string token, std::string trip_id, Callback callback);
  ~ListenStream();

  ListenStream(const ListenStream&) = delete;
  ListenStream& operator=(const ListenStream&) = delete;

  // Blocks until the stream's response headers arrived (or it failed).
  Status wait_open(std::chrono::milliseconds timeout);
  void stop();
  [[nodiscard]] std::size_t received() const { return received_.load(); }

 private:
  void run();

  std::string base_url_;
  std::string token_;
  std::string trip_id_;
  Callback callback_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> received_{0};
  std::mutex mutex_;
  std::condition_variable cv_;
  int open_state_ = 0;  // 0 pending, 1 open, -1 failed
  std::thread thread_;
};

}  // namespace rucs::sim
