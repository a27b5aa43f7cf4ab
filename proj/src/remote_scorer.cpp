#include "docasd/remote_scorer.hpp"

#include <thread>

#include "docasd/error.hpp"
#include "docasd/log.hpp"
#include "httplib.h"
#include "json.hpp"

namespace docasd {

RemoteScorer::RemoteScorer(MetricId metric, RemoteOptions options)
    : Scorer(std::move(metric)), options_(std::move(options)) {
  if (options_.batch_size == 0) throw InvalidInput("remote batch size must be positive");
  if (options_.attempts < 1) throw InvalidInput("remote attempts must be at least 1");
  while (!options_.sidecar_url.empty() && options_.sidecar_url.back() == '/') {
    options_.sidecar_url.pop_back();
  }
  if (options_.sidecar_url.empty()) throw InvalidInput("sidecar URL is empty");
}

std::vector<double> RemoteScorer::score_items(std::span<const ScoreItem> items) const {
  std::vector<double> out;
  out.reserve(items.size());
  for (std::size_t start = 0; start < items.size(); start += options_.batch_size) {
    const auto batch = items.subspan(start, std::min(options_.batch_size, items.size() - start));
    const auto scores = post_batch(batch);
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

std::vector<double> RemoteScorer::post_batch(std::span<const ScoreItem> batch) const {
  nlohmann::json request;
  request["metric"] = metric().argument;
  auto& items = request["items"] = nlohmann::json::array();
  for (const auto& item : batch) {
    nlohmann::json j{{"src", item.src}, {"mt", item.mt}};
    if (item.ref) j["ref"] = *item.ref;
    items.push_back(std::move(j));
  }
  const std::string body = request.dump();

  std::string last_failure;
  auto backoff = options_.initial_backoff;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(options_.sidecar_url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(options_.request_timeout);
    client.set_write_timeout(options_.request_timeout);
    const auto res = client.Post("/v1/score", body, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500 || res->status == 429) {
      last_failure = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    if (res->status != 200) {
      throw MetricContractError("sidecar rejected " + metric().str() + " request with HTTP " +
                                std::to_string(res->status) + ": " + res->body);
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      auto scores = reply.at("scores").get<std::vector<double>>();
      if (scores.size() != batch.size()) {
        throw MetricContractError("sidecar returned " + std::to_string(scores.size()) +
                                  " scores for " + std::to_string(batch.size()) + " items");
      }
      return scores;
    } catch (const nlohmann::json::exception& e) {
      throw MetricContractError(std::string("malformed sidecar response: ") + e.what());
    }
  }
  throw ScorerUnavailable("sidecar at " + options_.sidecar_url + " unavailable for " +
                          metric().str() + " after " + std::to_string(options_.attempts) +
                          " attempts (" + last_failure + ")");
}

}  // namespace docasd
