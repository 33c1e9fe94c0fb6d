#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "rucs/clock.hpp"
#include "rucs/config.hpp"
#include "rucs/http_server.hpp"
#include "rucs/service.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Road user communication service"};
  std::string config_path;
  std::optional<int> port;
  std::string bind;
  app.add_option("-c,--config", config_path, "JSON config file (RUCS_CONFIG overrides)");
  app.add_option("-p,--port", port, "Listen port; 0 picks a free one");
  app.add_option("--bind", bind, "Bind address");
  CLI11_PARSE(app, argc, argv);

  rucs::ServiceConfig config;
  const auto path = rucs::resolve_config_path(config_path.empty() ? std::nullopt
                                                                  : std::optional<std::filesystem::path>(config_path));
  if (path) {
    auto loaded = rucs::load_config(*path);
    if (!loaded) {
      std::cerr << "rucs-server: " << loaded.error().message << '\n';
      return 2;
    }
    config = *loaded;
  }
  if (port) config.port = *port;
  if (!bind.empty()) config.bind_address = bind;

  rucs::SystemClock clock;
  rucs::Service service(clock, rucs::Service::Options{config});
  rucs::HttpServer server(service, rucs::HttpServer::Options{config.bind_address, config.port, config.http_threads});
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  auto bound = server.start();
  if (!bound) {
    std::cerr << "rucs-server: " << bound.error().message << '\n';
    return 1;
  }
  // The sim and the smoke test read this line to find the port.
  std::printf("listening on %s\n", server.base_url().c_str());
  std::fflush(stdout);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}
