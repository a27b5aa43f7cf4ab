#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docasd/alignment.hpp"
#include "docasd/scorer.hpp"

namespace docasd {

// k consecutive aligned entries starting at source position `start`.
struct ChunkUnit {
  std::size_t k = 0;
  std::size_t start = 0;
  std::string src_text;
  std::string mt_text;
  std::optional<std::string> ref_text;
};

struct ChunkScoreSet {
  std::size_t k = 0;
  std::vector<double> unit_scores;  // m - k + 1 entries
  double mean = 0.0;
};

struct ASDResult {
  std::string doc_id;
  std::string metric;
  std::map<std::size_t, ChunkScoreSet> per_k;
  double final_score = 0.0;
  std::size_t placeholder_count = 0;
};

inline const std::vector<std::size_t> kDefaultChunkSizes = {1, 2, 3, 4};

// Windows of size k with stride 1. Placeholder entries add no text but keep
// their window position; a window made only of placeholders carries the
// placeholder text. Throws WindowTooLarge when k > m.
std::vector<ChunkUnit> make_units(const AlignedPair& pair, std::size_t k);

ChunkScoreSet evaluate_k(const AlignedPair& pair, std::size_t k, const Scorer& scorer);

// Scores every feasible k (k <= m) and averages the per-k means without
// weighting. Infeasible k are skipped.
ASDResult asd_score(const AlignedPair& pair, const Scorer& scorer,
                    const std::vector<std::size_t>& ks = kDefaultChunkSizes);

}  // namespace docasd
