#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docasd/segmentation.hpp"

namespace docasd {

struct ScoreItem {
  std::string src;
  std::string mt;  // empty for an omission placeholder
  std::optional<std::string> ref;
};

enum class MetricKind {
  asd_align,      // default reference-free alignment scorer (alias, see resolve())
  qe_remote,      // sidecar, reference-free
  ref_remote,     // sidecar, reference-based
  lexical,        // character-bigram cosine, local
  oracle_matrix,  // replays a fixture file
  custom,         // in-process scorer supplied by the caller
};

// Identifies a metric. Textual forms: "lexical", "asd-align",
// "qe-remote:<model>", "ref-remote:<model>", "oracle-matrix:<path>".
struct MetricId {
  MetricKind kind = MetricKind::lexical;
  std::string argument;  // model name, fixture path or custom name
  bool custom_reference_based = false;

  static MetricId parse(std::string_view text);
  static MetricId lexical() { return {MetricKind::lexical, {}}; }
  static MetricId custom(std::string name, bool reference_based = false) {
    return {MetricKind::custom, std::move(name), reference_based};
  }

  // asd-align maps onto the COMET-Kiwi QE model served by the sidecar.
  MetricId resolve() const;

  std::string str() const;
  bool reference_based() const;
  bool remote() const;
  // Every supported metric is higher-is-better.
  bool higher_is_better() const { return true; }

  bool operator==(const MetricId&) const = default;
};

inline constexpr std::string_view kDefaultAlignModel = "wmt22-cometkiwi-da";

// Character-bigram cosine of the NFC-lowercased inputs. 0 when either side
// has no bigram.
double lexical_similarity(std::string_view a, std::string_view b);

class Scorer {
 public:
  explicit Scorer(MetricId metric) : metric_(std::move(metric)) {}
  virtual ~Scorer() = default;

  const MetricId& metric() const { return metric_; }

  // One finite score per item, in order. Reference-based metrics require
  // item.ref; reference-free metrics ignore it.
  std::vector<double> score_batch(std::span<const ScoreItem> items) const;

 protected:
  virtual std::vector<double> score_items(std::span<const ScoreItem> items) const = 0;

 private:
  MetricId metric_;
};

using ScorerPtr = std::shared_ptr<const Scorer>;

class LexicalScorer final : public Scorer {
 public:
  LexicalScorer() : Scorer(MetricId::lexical()) {}

 protected:
  std::vector<double> score_items(std::span<const ScoreItem> items) const override;
};

// Scores looked up by exact (src, mt) text from a JSON fixture:
//   {"src": [...], "tgt": [...], "values": [[...]],     grid, row = src
//    "pairs": [{"src": s, "mt": t, "score": x}, ...],   extra entries
//    "default": x}                                       optional fallback
class OracleScorer final : public Scorer {
 public:
  explicit OracleScorer(const std::string& fixture_path);
  OracleScorer(MetricId id, std::map<std::pair<std::string, std::string>, double> table,
               std::optional<double> fallback);

 protected:
  std::vector<double> score_items(std::span<const ScoreItem> items) const override;

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
  std::optional<double> fallback_;
};

struct RemoteOptions {
  std::string sidecar_url = "http://127.0.0.1:8765";
  std::size_t batch_size = 64;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::seconds request_timeout{300};
};

ScorerPtr make_scorer(const MetricId& metric, const RemoteOptions& remote = {});

// m x n grid of raw scores, row-major, row = source sentence.
struct SimilarityMatrix {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<double> values;
  std::string metric;
  std::string src_digest;
  std::string tgt_digest;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }

  static SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows);

  bool operator==(const SimilarityMatrix&) const = default;
};

std::string digest(const SentenceList& list);

class MatrixCache;

// Scores every (src[i], tgt[j]) pair in a single score_batch call. When a
// cache is given, a stored matrix for the same content and metric is reused.
SimilarityMatrix build_matrix(const SentenceList& src, const SentenceList& tgt,
                              const Scorer& scorer, const MatrixCache* cache = nullptr);

}  // namespace docasd
