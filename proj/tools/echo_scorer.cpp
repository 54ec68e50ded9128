// echo_scorer.cpp
//
// Minimal scorer sidecar for protocol tests. The score of a frame is
// (timestamp / 10) when its asset locator contains "t=<seconds>", otherwise
// (index / 10). Fault injection flags exercise the client's retry and
// validation paths.
//
// Usage:
//   aks_echo_scorer [--transport stdio|http] [--port N]
//                   [--fail-every N] [--fatal-every N] [--hang-every N]
//                   [--hang-ms MS] [--reverse] [--drop] [--duplicate]
//                   [--nan-index I]
//
// In http mode the bound port is printed as "port <N>" on stdout.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

namespace {

struct Faults {
  long fail_every = 0;
  long fatal_every = 0;
  long hang_every = 0;
  long hang_ms = 2000;
  bool reverse = false;
  bool drop = false;
  bool duplicate = false;
  long long nan_index = -1;
};

double score_for(long long index, const std::string& asset) {
  if (auto pos = asset.find("t="); pos != std::string::npos) {
    try {
      return std::stod(asset.substr(pos + 2)) / 10.0;
    } catch (const std::exception&) {
    }
  }
  return static_cast<double>(index) / 10.0;
}

std::string error_message(const std::string& msg, bool fatal) {
  nlohmann::json j{{"type", "error"}, {"message", msg}};
  if (fatal) j["fatal"] = true;
  return j.dump();
}

class Echo {
public:
  explicit Echo(Faults f) : faults_(f) {}

  // Returns the reply line for one score request.
  std::string handle(const std::string& line) {
    std::lock_guard lock(mu_);
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      return error_message(std::string("bad request: ") + e.what(), true);
    }
    if (req.value("type", "") != "score") return error_message("expected a score request", true);
    ++requests_;
    if (faults_.fatal_every && requests_ % faults_.fatal_every == 0) return error_message("injected fatal", true);
    if (faults_.fail_every && requests_ % faults_.fail_every == 0) return error_message("injected transient", false);
    if (faults_.hang_every && requests_ % faults_.hang_every == 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(faults_.hang_ms));

    std::vector<std::string> items;
    for (const auto& f : req["frames"]) {
      const auto idx = f.at("index").get<long long>();
      const auto asset = f.value("asset", "");
      std::string score = idx == faults_.nan_index ? "NaN" : nlohmann::json(score_for(idx, asset)).dump();
      items.push_back("{\"index\":" + std::to_string(idx) + ",\"score\":" + score + "}");
    }
    if (faults_.drop && !items.empty()) items.pop_back();
    if (faults_.duplicate && !items.empty()) items.push_back(items.front());
    if (faults_.reverse) std::reverse(items.begin(), items.end());
    std::string out = "{\"type\":\"scores\",\"scores\":[";
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out + "]}";
  }

private:
  Faults faults_;
  long requests_ = 0;
  std::mutex mu_;
};

int serve_stdio(Echo& echo) {
  std::string line;
  bool greeted = false;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (!greeted) {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_object() && j.value("type", "") == "hello") {
        greeted = true;
        std::cout << R"({"type":"ready","protocol":1})" << '\n' << std::flush;
        continue;
      }
      std::cout << error_message("expected hello", true) << '\n' << std::flush;
      continue;
    }
    std::cout << echo.handle(line) << '\n' << std::flush;
  }
  return 0;
}

int serve_http(Echo& echo, int port) {
  httplib::Server server;
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });
  server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    auto body = echo.handle(req.body);
    if (body.find("\"type\":\"error\"") != std::string::npos) res.status = 503;
    res.set_content(body, "application/json");
  });
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port("127.0.0.1");
  } else if (!server.bind_to_port("127.0.0.1", port)) {
    bound = -1;
  }
  if (bound < 0) {
    std::cerr << "aks_echo_scorer: cannot bind port " << port << '\n';
    return 1;
  }
  std::cout << "port " << bound << '\n' << std::flush;
  return server.listen_after_bind() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Echo scorer sidecar for protocol tests"};
  std::string transport = "stdio";
  int port = 0;
  Faults f;
  app.add_option("--transport", transport)->check(CLI::IsMember({"stdio", "http"}));
  app.add_option("--port", port);
  app.add_option("--fail-every", f.fail_every, "Non-fatal error on every Nth request");
  app.add_option("--fatal-every", f.fatal_every, "Fatal error on every Nth request");
  app.add_option("--hang-every", f.hang_every, "Delay every Nth reply by --hang-ms");
  app.add_option("--hang-ms", f.hang_ms);
  app.add_flag("--reverse", f.reverse, "Reply with scores in reverse order");
  app.add_flag("--drop", f.drop, "Omit the last requested index");
  app.add_flag("--duplicate", f.duplicate, "Repeat the first index");
  app.add_option("--nan-index", f.nan_index, "Reply NaN for this frame index");
  CLI11_PARSE(app, argc, argv);

  Echo echo(f);
  return transport == "http" ? serve_http(echo, port) : serve_stdio(echo);
}
