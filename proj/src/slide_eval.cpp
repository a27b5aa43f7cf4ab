#include "docasd/slide_eval.hpp"

#include <numeric>

#include "docasd/error.hpp"

namespace docasd {

namespace {

std::string join_window(const std::vector<ReconstructedEntry>& entries, std::size_t start,
                        std::size_t k, const std::string& joiner, const std::string& placeholder) {
  std::string out;
  bool any = false;
  for (std::size_t i = start; i < start + k; ++i) {
    if (entries[i].is_placeholder) continue;
    if (any) out += joiner;
    out += entries[i].text;
    any = true;
  }
  return any ? out : placeholder;
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

std::vector<ChunkUnit> make_units(const AlignedPair& pair, std::size_t k) {
  const std::size_t m = pair.m();
  if (k == 0) throw InvalidInput("chunk size must be at least 1");
  if (k > m) throw WindowTooLarge(k, m);
  if (pair.tgt_reconstructed.size() != m ||
      (pair.ref_reconstructed && pair.ref_reconstructed->size() != m)) {
    throw InvalidInput("aligned pair sides differ in length");
  }

  std::vector<ChunkUnit> units;
  units.reserve(m - k + 1);
  for (std::size_t s = 0; s + k <= m; ++s) {
    ChunkUnit unit;
    unit.k = k;
    unit.start = s;
    for (std::size_t i = s; i < s + k; ++i) {
      if (i > s) unit.src_text += pair.src_joiner;
      unit.src_text += pair.src[i];
    }
    unit.mt_text = join_window(pair.tgt_reconstructed, s, k, pair.tgt_joiner, pair.placeholder);
    if (pair.ref_reconstructed) {
      unit.ref_text = join_window(*pair.ref_reconstructed, s, k, pair.ref_joiner, pair.placeholder);
    }
    units.push_back(std::move(unit));
  }
  return units;
}

ChunkScoreSet evaluate_k(const AlignedPair& pair, std::size_t k, const Scorer& scorer) {
  if (scorer.metric().reference_based() && !pair.ref_reconstructed) {
    throw MetricContractError("metric " + scorer.metric().str() +
                              " needs a reference aligned to the source");
  }
  const auto units = make_units(pair, k);
  std::vector<ScoreItem> items;
  items.reserve(units.size());
  for (const auto& unit : units) items.push_back({unit.src_text, unit.mt_text, unit.ref_text});

  ChunkScoreSet out;
  out.k = k;
  out.unit_scores = scorer.score_batch(items);
  out.mean = mean_of(out.unit_scores);
  return out;
}

ASDResult asd_score(const AlignedPair& pair, const Scorer& scorer,
                    const std::vector<std::size_t>& ks) {
  if (pair.m() == 0) throw InvalidInput("cannot score an empty aligned pair");
  ASDResult out;
  out.doc_id = pair.src.doc_id;
  out.metric = scorer.metric().str();
  out.placeholder_count = pair.placeholder_count;
  for (std::size_t k : ks) {
    if (k == 0) throw InvalidInput("chunk size must be at least 1");
    if (k > pair.m() || out.per_k.contains(k)) continue;
    out.per_k.emplace(k, evaluate_k(pair, k, scorer));
  }
  if (out.per_k.empty()) {
    throw InvalidInput("no feasible chunk size for a document of " + std::to_string(pair.m()) +
                       " sentences");
  }
  double sum = 0.0;
  for (const auto& [k, set] : out.per_k) sum += set.mean;
  out.final_score = sum / static_cast<double>(out.per_k.size());
  return out;
}

}  // namespace docasd
