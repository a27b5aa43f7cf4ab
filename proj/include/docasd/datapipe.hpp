#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "docasd/alignment.hpp"
#include "docasd/slide_eval.hpp"

namespace docasd {

struct DocRecord {
  std::string doc_id;
  std::string src;
  std::vector<std::pair<std::string, std::string>> candidates;  // system -> translation, in file order
  std::optional<std::string> ref;
  Languages langs;

  const std::string* candidate(const std::string& system) const;
};

// One JSON object per line:
//   {"doc_id", "src", "src_lang", "tgt_lang", "ref"?,
//    "candidates": {system: text, ...}  or  "tgt": text [, "system": name]}
// Blank lines are ignored. All malformed lines are reported together, by
// line number, in one InvalidInput.
std::vector<DocRecord> parse_corpus(std::istream& in);

// Everything needed to turn a (source, translation) pair into an ASDResult.
struct Pipeline {
  AlignConfig align;
  ScorerPtr eval_scorer;
  std::vector<std::size_t> ks = kDefaultChunkSizes;

  ASDResult evaluate(const DocRecord& record, const std::string& system) const;
  ASDResult evaluate_text(std::string_view src, std::string_view hyp, const Languages& langs,
                          std::optional<std::string_view> ref = std::nullopt,
                          std::string doc_id = {}) const;
};

struct Selection {
  std::string system;
  ASDResult result;
  std::vector<std::string> failures;  // "system: reason" for candidates that failed
};

// Highest final score; ties go to the earlier candidate.
Selection select_best(const DocRecord& record, const Pipeline& pipeline);

struct PreferenceTriplet {
  std::string src;
  std::string chosen;
  std::string rejected;
  double score_chosen = 0.0;
  double score_rejected = 0.0;
  double margin = 0.0;  // score_chosen - score_rejected
};

// Emits a triplet iff |score_a - score_b| > margin.
std::optional<PreferenceTriplet> build_preference_pairs(const DocRecord& record,
                                                        const std::string& system_a,
                                                        const std::string& system_b,
                                                        const Pipeline& pipeline,
                                                        double margin = 0.0);

struct RewardResult {
  double value = 0.0;
  std::optional<std::string> diagnostic;  // set when value is the failure sentinel
};

struct RewardOptions {
  double failure_reward = -1.0;
};

// Reference-free ASD of `hyp` against `src`. Never throws for data or scorer
// failures: those produce options.failure_reward with a diagnostic.
RewardResult reward(std::string_view src, std::string_view hyp, const Languages& langs,
                    const Pipeline& pipeline, const RewardOptions& options = {});

// One reward per hypothesis, e.g. a group of sampled rollouts for one source.
std::vector<RewardResult> reward_batch(std::string_view src, const std::vector<std::string>& hyps,
                                       const Languages& langs, const Pipeline& pipeline,
                                       const RewardOptions& options = {});

// Calls fn(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by fn is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct DocumentResult {
  std::string doc_id;
  std::string system;
  ASDResult result;
};

struct SkippedDocument {
  std::string doc_id;
  std::string system;
  std::string reason;
};

struct CorpusEvaluation {
  std::vector<DocumentResult> documents;  // ordered by doc_id, then candidate order
  std::vector<SkippedDocument> skipped;
};

CorpusEvaluation evaluate_corpus(const std::vector<DocRecord>& records, const Pipeline& pipeline,
                                 std::size_t workers = 1);

// Mean final score per system, systems in first-appearance order.
std::vector<std::pair<std::string, double>> system_means(const std::vector<DocumentResult>& docs);

struct PreferenceRun {
  std::vector<PreferenceTriplet> triplets;  // ordered by doc_id
  std::size_t filtered = 0;                 // pairs within the margin
  std::vector<SkippedDocument> skipped;
};

// For each record compares `system_a` and `system_b`, or the first two
// candidates when the names are empty.
PreferenceRun generate_preferences(const std::vector<DocRecord>& records, const Pipeline& pipeline,
                                   double margin, std::size_t workers = 1,
                                   const std::string& system_a = {},
                                   const std::string& system_b = {});

void write_triplet_jsonl(std::ostream& out, const PreferenceTriplet& triplet);

}  // namespace docasd
