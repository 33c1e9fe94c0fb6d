#include "rucs/sim/client.hpp"

#include <chrono>
#include <cstdlib>

#include <httplib.h>

#include "rucs/codec.hpp"
#include "rucs/service.hpp"

namespace rucs::sim {

namespace {

using nlohmann::json;
using Steady = std::chrono::steady_clock;

double header_seconds(const httplib::Result& res) {
  const auto value = res->get_header_value(kProcessingTimeHeader);
  if (value.empty()) return 0.0;
  return std::strtod(value.c_str(), nullptr) / 1000.0;
}

}  // namespace

ServiceClient::ServiceClient(std::string base_url, LatencyProfile latency, std::uint64_t seed)
    : base_url_(std::move(base_url)), latency_(latency), rng_(seed), http_(std::make_unique<httplib::Client>(base_url_)) {
  http_->set_keep_alive(true);
  http_->set_tcp_nodelay(true);
  http_->set_connection_timeout(std::chrono::seconds(2));
  http_->set_read_timeout(std::chrono::seconds(15));
}

ServiceClient::~ServiceClient() = default;

double ServiceClient::injected_delay_ms() {
  if (latency_.fixed_ms <= 0 && latency_.jitter_ms <= 0) return 0.0;
  std::uniform_real_distribution<double> jitter(-latency_.jitter_ms, latency_.jitter_ms);
  return std::max(0.0, latency_.fixed_ms + (latency_.jitter_ms > 0 ? jitter(rng_) : 0.0));
}

template <typename Send>
Expected<Reply> ServiceClient::timed(Send&& send) {
  Reply reply;
  reply.sent_at = clock_.now();
  const auto started = Steady::now();
  if (const double delay = injected_delay_ms(); delay > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
  }
  httplib::Result res = send();
  const auto finished = Steady::now();
  if (!res) {
    return make_error(ErrorCode::service_unreachable,
                      base_url_ + ": " + httplib::to_string(res.error()));
  }
  reply.received_at = clock_.now();
  reply.rtt_s = std::chrono::duration<double>(finished - started).count();
  reply.server_processing_s = std::min(header_seconds(res), reply.rtt_s);
  reply.status = res->status;
  try {
    reply.body = res->body.empty() ? json::object() : json::parse(res->body);
  } catch (const json::exception&) {
    reply.body = json{{"raw", res->body}};
  }
  return reply;
}

Expected<Reply> ServiceClient::get(const std::string& path) {
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  return timed([&] { return http_->Get(path, headers); });
}

Expected<Reply> ServiceClient::post(const std::string& path, const json& body) {
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const auto text = body.dump();
  return timed([&] { return http_->Post(path, headers, text, "application/json"); });
}

Status wait_healthy(const std::string& base_url, int attempts) {
  httplib::Client client(base_url);
  client.set_connection_timeout(std::chrono::seconds(1));
  client.set_read_timeout(std::chrono::seconds(2));
  for (int i = 0; i < attempts; ++i) {
    if (auto res = client.Get("/healthz"); res && res->status == 200) return ok();
    if (i + 1 < attempts) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  return make_error(ErrorCode::service_unreachable, "no healthy service at " + base_url);
}

ListenStream::ListenStream(std::string base_url, std::string token, std::string trip_id, Callback callback)
    : base_url_(std::move(base_url)),
      token_(std::move(token)),
      trip_id_(std::move(trip_id)),
      callback_(std::move(callback)),
      thread_([this] { run(); }) {}

ListenStream::~ListenStream() { stop(); }

void ListenStream::run() {
  httplib::Client client(base_url_);
  client.set_connection_timeout(std::chrono::seconds(2));
  // Heartbeats arrive every second; a silent peer for this long is gone.
  client.set_read_timeout(std::chrono::seconds(5));
  const httplib::Headers headers{{"Authorization", "Bearer " + token_}};
  std::string pending;

  const auto mark = [this](int state) {
    {
      std::lock_guard lock(mutex_);
      if (open_state_ == 0) open_state_ = state;
    }
    cv_.notify_all();
  };

  auto res = client.Get(
      "/api/trips/" + trip_id_ + "/listen", headers,
      [&](const httplib::Response& response) {
        mark(response.status == 200 ? 1 : -1);
        return response.status == 200;
      },
      [&](const char* data, std::size_t length) {
        pending.append(data, length);
        std::size_t newline;
        while ((newline = pending.find('\n')) != std::string::npos) {
          const std::string line = pending.substr(0, newline);
          pending.erase(0, newline + 1);
          if (line.empty()) continue;
          try {
            const auto envelope = json::parse(line).get<Envelope>();
            received_.fetch_add(1);
            callback_(envelope);
          } catch (const std::exception&) {
            // A malformed frame is skipped; the next line re-synchronizes.
          }
        }
        return !stopping_.load();
      });
  (void)res;
  mark(-1);
}

Status ListenStream::wait_open(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [this] { return open_state_ != 0; });
  if (open_state_ == 1) return ok();
  return make_error(ErrorCode::service_unreachable, "listen stream for trip " + trip_id_ + " did not open");
}

void ListenStream::stop() {
  stopping_ = true;
  if (thread_.joinable()) thread_.join();
}

}  // namespace rucs::sim
