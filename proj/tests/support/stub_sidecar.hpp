#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <set>
#include <string>
#include <thread>

#include "docasd/scorer.hpp"
#include "httplib.h"
#include "json.hpp"

namespace docasd::testkit {

// A loopback port nothing listens on (bound, read back, closed).
inline int unused_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

// In-process stand-in for the scoring sidecar running in stub-model mode:
// every metric scores with lexical_similarity(src, mt).
class StubSidecar {
 public:
  std::set<std::string> qe_metrics = {"stub-qe"};
  std::set<std::string> ref_metrics = {"stub-ref"};
  std::size_t max_batch = 128;
  std::atomic<int> fail_next{0};      // answer this many requests with 503
  std::atomic<bool> malformed{false};  // answer 200 with a bad body
  std::atomic<int> score_requests{0};
  std::atomic<int> refs_seen{0};

  StubSidecar() {
    server_.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
      handle_score(req, res);
    });
    server_.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json loaded = nlohmann::json::array();
      for (const auto& m : qe_metrics) loaded.push_back(m);
      for (const auto& m : ref_metrics) loaded.push_back(m);
      res.set_content(nlohmann::json{{"status", "ok"}, {"loaded_metrics", loaded}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubSidecar() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  void handle_score(const httplib::Request& req, httplib::Response& res) {
    ++score_requests;
    if (fail_next > 0) {
      --fail_next;
      res.status = 503;
      res.set_content(R"({"error": "model loading"})", "application/json");
      return;
    }
    if (malformed) {
      res.set_content(R"({"scores": "nope"})", "application/json");
      return;
    }
    auto error = [&](int status, const std::string& msg) {
      res.status = status;
      res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
    };
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (...) {
      return error(400, "invalid JSON");
    }
    const std::string metric = body.value("metric", "");
    const bool ref_based = ref_metrics.contains(metric);
    if (!ref_based && !qe_metrics.contains(metric)) return error(400, "unknown metric " + metric);
    const auto& items = body.at("items");
    if (items.size() > max_batch) return error(413, "batch too large");
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& item : items) {
      if (ref_based && !item.contains("ref")) return error(400, "missing ref");
      if (item.contains("ref")) ++refs_seen;
      scores.push_back(lexical_similarity(item.at("src").get<std::string>(), item.at("mt").get<std::string>()));
    }
    res.set_content(nlohmann::json{{"scores", scores}}.dump(), "application/json");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace docasd::testkit
