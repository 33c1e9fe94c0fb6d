#include "rucs/http_server.hpp"

#include <cstdio>

#include <httplib.h>

#include "rucs/codec.hpp"

namespace rucs {

namespace {

ApiRequest to_api_request(const httplib::Request& req) {
  ApiRequest out;
  out.method = req.method;
  out.path = req.path;
  out.authorization = req.get_header_value("Authorization");
  out.body = req.body;
  for (const auto& [key, value] : req.params) out.query.emplace(key, value);
  return out;
}

void write_response(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", api.processing_ms);
  res.set_header(kProcessingTimeHeader, buf);
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(Service& service, Options options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  const std::size_t threads = options_.threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server_->set_tcp_nodelay(true);
  // clients poll at about 1 Hz over one connection; the stock limits of five
  // requests and five idle seconds made them race the server's close
  server_->set_keep_alive_max_count(100000);
  server_->set_keep_alive_timeout(60);
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    write_response(res, service_.handle(to_api_request(req)));
  };

  server_->Get(R"(/api/trips/([A-Za-z0-9_-]+)/listen)", [this](const httplib::Request& req,
                                                               httplib::Response& res) {
    const auto started = std::chrono::steady_clock::now();
    auto sub = service_.open_listen_stream(req.get_header_value("Authorization"), TripId{req.matches[1]});
    if (!sub) {
      ApiResponse api{http_status(sub.error().code), error_body(sub.error()), 0.0};
      api.processing_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
      write_response(res, api);
      return;
    }
    auto shared = std::make_shared<Subscription>(std::move(*sub));
    const auto heartbeat = options_.stream_heartbeat;
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [shared, heartbeat, idle = std::chrono::steady_clock::now()](std::size_t,
                                                                     httplib::DataSink& sink) mutable {
          auto envelope = shared->next(std::chrono::milliseconds(200));
          if (envelope) {
            const std::string line = json(*envelope).dump() + "\n";
            idle = std::chrono::steady_clock::now();
            return sink.write(line.data(), line.size());
          }
          if (shared->closed()) {
            sink.done();
            return true;
          }
          if (std::chrono::steady_clock::now() - idle >= heartbeat) {
            idle = std::chrono::steady_clock::now();
            return sink.write("\n", 1);
          }
          return sink.is_writable();
        },
        [shared](bool) { shared->unsubscribe(); });
  });

  server_->Get(".*", forward);
  server_->Post(".*", forward);
  server_->Put(".*", forward);
  server_->Delete(".*", forward);
  server_->Patch(".*", forward);
}

Expected<int> HttpServer::start() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.bind_address);
  } else if (!server_->bind_to_port(options_.bind_address, port)) {
    port = -1;
  }
  if (port <= 0) {
    return make_error(ErrorCode::internal,
                      "cannot bind " + options_.bind_address + ":" + std::to_string(options_.port));
  }
  port_ = port;
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

Status HttpServer::run() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.bind_address);
  } else if (!server_->bind_to_port(options_.bind_address, port)) {
    port = -1;
  }
  if (port <= 0) {
    return make_error(ErrorCode::internal,
                      "cannot bind " + options_.bind_address + ":" + std::to_string(options_.port));
  }
  port_ = port;
  if (!server_->listen_after_bind()) return make_error(ErrorCode::internal, "server stopped with an error");
  return ok();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string HttpServer::base_url() const {
  return "http://" + options_.bind_address + ":" + std::to_string(port_.load());
}

}  // namespace rucs
