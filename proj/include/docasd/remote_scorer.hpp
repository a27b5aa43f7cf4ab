#pragma once

#include "docasd/scorer.hpp"

namespace docasd {

// Client for the scoring sidecar.
//
//   POST {url}/v1/score   {"metric": <model>, "items": [{"src", "mt", "ref"?}, ...]}
//                      -> {"scores": [<real>, ...]}
//
// Items are sent in chunks of `batch_size`. Connection failures, 5xx and 429
// responses are retried with exponential backoff; after the last attempt the
// call fails with ScorerUnavailable. Other 4xx responses are contract
// violations (MetricContractError) and are not retried.
class RemoteScorer final : public Scorer {
 public:
  RemoteScorer(MetricId metric, RemoteOptions options);

  const RemoteOptions& options() const { return options_; }

 protected:
  std::vector<double> score_items(std::span<const ScoreItem> items) const override;

 private:
  std::vector<double> post_batch(std::span<const ScoreItem> batch) const;

  RemoteOptions options_;
  std::string host_;
  int port_ = 0;
};

}  // namespace docasd
