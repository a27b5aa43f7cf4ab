#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docasd/scorer.hpp"
#include "docasd/segmentation.hpp"

namespace docasd {

class MatrixCache;

enum class DpMode {
  strict,   // path runs from (0, 0) to (m-1, n-1); a single target is unpinned
  relaxed,  // first and last target may match any source sentence
};

struct SearchOptions {
  DpMode mode = DpMode::strict;
  // Require the source index to advance by at least one per target sentence.
  bool forbid_zero_step = false;
};

struct PathPoint {
  std::size_t source;
  std::size_t target;
  bool operator==(const PathPoint&) const = default;
};

// One point per target sentence, target indices 0..n-1 in order, source
// indices non-decreasing.
struct AlignmentPath {
  std::vector<PathPoint> pairs;
  double total = 0.0;
  bool operator==(const AlignmentPath&) const = default;
};

// Throws InvalidInput if `path` is not a valid path over an m x n grid.
void validate_path(const AlignmentPath& path, std::size_t m, std::size_t n,
                   const SearchOptions& options);

// Maximum-total monotone path in O(m*n) time using a running prefix maximum
// over the previous target column. Ties go to the smallest source index at
// every backtrack step.
AlignmentPath dp_search(const SimilarityMatrix& matrix, const SearchOptions& options = {});

// Exhaustive enumeration of every admissible path. Test oracle for
// dp_search; refuses instances with more than `max_paths` paths.
AlignmentPath brute_force_search(const SimilarityMatrix& matrix, const SearchOptions& options = {},
                                 std::size_t max_paths = 10'000'000);

// Number of admissible paths, saturating at `cap + 1`.
std::size_t count_paths(std::size_t m, std::size_t n, const SearchOptions& options,
                        std::size_t cap);

enum class JoinerPolicy { space, none, automatic };

JoinerPolicy parse_joiner_policy(std::string_view text);
std::string_view to_string(JoinerPolicy policy);
std::string_view to_string(DpMode mode);
DpMode parse_dp_mode(std::string_view text);

// "" for zh/ja/ko/th under the automatic policy, " " otherwise.
std::string joiner_for(JoinerPolicy policy, std::string_view language);

struct ReconstructedEntry {
  std::string text;
  std::vector<std::size_t> target_indices;
  bool is_placeholder = false;
  bool operator==(const ReconstructedEntry&) const = default;
};

struct ReconstructOptions {
  std::string placeholder;  // inserted for source sentences with no target
  JoinerPolicy joiner = JoinerPolicy::automatic;
};

// Groups target sentences by the source index the path assigns them to.
std::vector<ReconstructedEntry> reconstruct_entries(std::size_t m, const SentenceList& tgt,
                                                    const AlignmentPath& path,
                                                    const ReconstructOptions& options);

struct AlignedPair {
  SentenceList src;
  std::vector<ReconstructedEntry> tgt_reconstructed;
  std::optional<std::vector<ReconstructedEntry>> ref_reconstructed;
  AlignmentPath path;
  std::optional<AlignmentPath> ref_path;
  std::size_t placeholder_count = 0;
  std::string placeholder;
  std::string src_joiner = " ";
  std::string tgt_joiner = " ";
  std::string ref_joiner = " ";

  std::size_t m() const { return src.size(); }
};

AlignedPair reconstruct(const SentenceList& src, const SentenceList& tgt,
                        const AlignmentPath& path, const ReconstructOptions& options = {});

struct Languages {
  std::string src;
  std::string tgt;
};

struct AlignConfig {
  SegmenterConfig segmenter;
  SearchOptions search;
  ReconstructOptions reconstruct;
  ScorerPtr align_scorer;                 // reference-free
  const MatrixCache* cache = nullptr;     // optional
  bool align_reference = false;           // set when the evaluation metric uses references
};

// segment -> build_matrix -> dp_search -> reconstruct. A target document
// that is empty after trimming reconstructs to placeholders only. When
// `ref_doc` is given and config.align_reference is set, the reference is
// aligned to the same source segmentation the same way.
AlignedPair align_document(std::string_view src_doc, std::string_view tgt_doc,
                           const Languages& langs, const AlignConfig& config,
                           std::optional<std::string_view> ref_doc = std::nullopt,
                           std::string doc_id = {});

}  // namespace docasd
