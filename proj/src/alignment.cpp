#include "docasd/alignment.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>

#include "docasd/error.hpp"
#include "docasd/matrix_cache.hpp"
#include "docasd/unicode.hpp"

namespace docasd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNoPred = std::numeric_limits<std::uint32_t>::max();

void check_matrix(const SimilarityMatrix& matrix) {
  if (matrix.m == 0 || matrix.n == 0) throw InvalidInput("alignment needs a non-empty matrix");
  if (matrix.values.size() != matrix.m * matrix.n) {
    throw InvalidInput("similarity matrix storage does not match its dimensions");
  }
  if (matrix.m >= kNoPred) throw InvalidInput("similarity matrix has too many rows");
}

// A single target sentence cannot sit on both (0, 0) and (m-1, 0), so strict
// mode pins nothing when n == 1.
bool pinned(const SearchOptions& options, std::size_t n) {
  return options.mode == DpMode::strict && n > 1;
}

bool can_start_at(std::size_t i, const SearchOptions& options, std::size_t n) {
  return !pinned(options, n) || i == 0;
}

std::string primary_language(std::string_view language) {
  std::string out;
  for (char c : language) {
    if (c == '-' || c == '_') break;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

void validate_path(const AlignmentPath& path, std::size_t m, std::size_t n,
                   const SearchOptions& options) {
  if (path.pairs.size() != n) {
    throw InvalidInput("path has " + std::to_string(path.pairs.size()) + " points for " +
                       std::to_string(n) + " target sentences");
  }
  for (std::size_t t = 0; t < n; ++t) {
    const auto& p = path.pairs[t];
    if (p.target != t) throw InvalidInput("path target indices must be 0..n-1 in order");
    if (p.source >= m) throw InvalidInput("path source index out of range");
    if (t > 0) {
      const auto prev = path.pairs[t - 1].source;
      if (p.source < prev || (options.forbid_zero_step && p.source == prev)) {
        throw InvalidInput("path source indices must not decrease");
      }
    }
  }
  if (pinned(options, n) &&
      (path.pairs.front().source != 0 || path.pairs.back().source != m - 1)) {
    throw InvalidInput("strict path must start at source 0 and end at source m-1");
  }
}

AlignmentPath dp_search(const SimilarityMatrix& matrix, const SearchOptions& options) {
  check_matrix(matrix);
  const std::size_t m = matrix.m, n = matrix.n;

  // Column-major in the target dimension: best[t * m + i] is the best total
  // of a path over targets 0..t ending at (i, t).
  std::vector<double> best(m * n, kNegInf);
  std::vector<std::uint32_t> pred(m * n, kNoPred);

  for (std::size_t i = 0; i < m; ++i) {
    if (can_start_at(i, options, n)) best[i] = matrix.at(i, 0);
  }
  for (std::size_t t = 1; t < n; ++t) {
    const double* prev = &best[(t - 1) * m];
    double* cur = &best[t * m];
    std::uint32_t* cur_pred = &pred[t * m];
    double run_max = kNegInf;
    std::uint32_t run_arg = kNoPred;
    for (std::size_t i = 0; i < m; ++i) {
      // Predecessor window is [0, i] or, without zero steps, [0, i-1].
      const auto absorb = [&](std::size_t k) {
        if (prev[k] > run_max) {
          run_max = prev[k];
          run_arg = static_cast<std::uint32_t>(k);
        }
      };
      if (!options.forbid_zero_step) absorb(i);
      if (run_arg != kNoPred) {
        cur[i] = run_max + matrix.at(i, t);
        cur_pred[i] = run_arg;
      }
      if (options.forbid_zero_step) absorb(i);
    }
  }

  const double* last = &best[(n - 1) * m];
  std::size_t end = m;
  if (pinned(options, n)) {
    if (last[m - 1] != kNegInf) end = m - 1;
  } else {
    double top = kNegInf;
    for (std::size_t i = 0; i < m; ++i) {
      if (last[i] > top) {
        top = last[i];
        end = i;
      }
    }
  }
  if (end == m) {
    throw InvalidInput("no admissible path over a " + std::to_string(m) + "x" +
                       std::to_string(n) + " matrix with the requested constraints");
  }

  AlignmentPath path;
  path.total = last[end];
  path.pairs.resize(n);
  std::size_t i = end;
  for (std::size_t t = n; t-- > 0;) {
    path.pairs[t] = {i, t};
    if (t > 0) i = pred[t * m + i];
  }
  return path;
}

std::size_t count_paths(std::size_t m, std::size_t n, const SearchOptions& options,
                        std::size_t cap) {
  if (m == 0 || n == 0) return 0;
  const std::size_t sat = cap + 1;
  std::vector<std::size_t> ways(m, 0);
  for (std::size_t i = 0; i < m; ++i) ways[i] = can_start_at(i, options, n) ? 1 : 0;
  for (std::size_t t = 1; t < n; ++t) {
    std::vector<std::size_t> next(m, 0);
    std::size_t running = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!options.forbid_zero_step) running = std::min(sat, running + ways[i]);
      next[i] = running;
      if (options.forbid_zero_step) running = std::min(sat, running + ways[i]);
    }
    ways = std::move(next);
  }
  if (pinned(options, n)) return ways[m - 1];
  std::size_t total = 0;
  for (auto w : ways) total = std::min(sat, total + w);
  return total;
}

AlignmentPath brute_force_search(const SimilarityMatrix& matrix, const SearchOptions& options,
                                 std::size_t max_paths) {
  check_matrix(matrix);
  const std::size_t m = matrix.m, n = matrix.n;
  const std::size_t paths = count_paths(m, n, options, max_paths);
  if (paths > max_paths) {
    throw OracleTooLarge("exhaustive search over " + std::to_string(m) + "x" + std::to_string(n) +
                         " would enumerate more than " + std::to_string(max_paths) + " paths");
  }
  if (paths == 0) throw InvalidInput("no admissible path for the requested constraints");

  std::vector<std::size_t> current(n), best_seq;
  double best_total = kNegInf;

  // Same tie-break as dp_search: among equal totals, compare source indices
  // from the last target backwards and keep the smaller one.
  auto better = [&](double total) {
    if (best_seq.empty() || total > best_total) return true;
    if (total < best_total) return false;
    for (std::size_t t = n; t-- > 0;) {
      if (current[t] != best_seq[t]) return current[t] < best_seq[t];
    }
    return false;
  };

  auto recurse = [&](auto&& self, std::size_t t, double sum) -> void {
    if (t == n) {
      if (pinned(options, n) && current[n - 1] != m - 1) return;
      if (better(sum)) {
        best_total = sum;
        best_seq = current;
      }
      return;
    }
    std::size_t lo = 0;
    if (t == 0) {
      if (pinned(options, n)) {
        current[0] = 0;
        self(self, 1, matrix.at(0, 0));
        return;
      }
    } else {
      lo = current[t - 1] + (options.forbid_zero_step ? 1 : 0);
    }
    for (std::size_t i = lo; i < m; ++i) {
      current[t] = i;
      self(self, t + 1, t == 0 ? matrix.at(i, 0) : sum + matrix.at(i, t));
    }
  };
  recurse(recurse, 0, 0.0);

  AlignmentPath path;
  path.total = best_total;
  for (std::size_t t = 0; t < n; ++t) path.pairs.push_back({best_seq[t], t});
  return path;
}

JoinerPolicy parse_joiner_policy(std::string_view text) {
  if (text == "space") return JoinerPolicy::space;
  if (text == "none") return JoinerPolicy::none;
  if (text == "auto") return JoinerPolicy::automatic;
  throw InvalidInput("unknown joiner policy '" + std::string(text) + "' (space, none, auto)");
}

std::string_view to_string(JoinerPolicy policy) {
  switch (policy) {
    case JoinerPolicy::space:
      return "space";
    case JoinerPolicy::none:
      return "none";
    case JoinerPolicy::automatic:
      return "auto";
  }
  return "auto";
}

DpMode parse_dp_mode(std::string_view text) {
  if (text == "strict") return DpMode::strict;
  if (text == "relaxed") return DpMode::relaxed;
  throw InvalidInput("unknown dp mode '" + std::string(text) + "' (strict, relaxed)");
}

std::string_view to_string(DpMode mode) { return mode == DpMode::strict ? "strict" : "relaxed"; }

std::string joiner_for(JoinerPolicy policy, std::string_view language) {
  switch (policy) {
    case JoinerPolicy::space:
      return " ";
    case JoinerPolicy::none:
      return "";
    case JoinerPolicy::automatic: {
      const std::string primary = primary_language(language);
      if (primary == "zh" || primary == "ja" || primary == "ko" || primary == "th" ||
          primary == "yue" || primary == "cmn") {
        return "";
      }
      return " ";
    }
  }
  return " ";
}

std::vector<ReconstructedEntry> reconstruct_entries(std::size_t m, const SentenceList& tgt,
                                                    const AlignmentPath& path,
                                                    const ReconstructOptions& options) {
  if (m == 0) throw InvalidInput("reconstruction needs at least one source sentence");
  if (path.pairs.size() != tgt.size()) {
    throw InvalidInput("path length " + std::to_string(path.pairs.size()) +
                       " does not match target sentence count " + std::to_string(tgt.size()));
  }
  validate_path(path, m, tgt.size(), SearchOptions{DpMode::relaxed, false});

  const std::string joiner = joiner_for(options.joiner, tgt.language);
  std::vector<ReconstructedEntry> entries(m);
  for (const auto& p : path.pairs) {
    auto& entry = entries[p.source];
    if (!entry.target_indices.empty()) entry.text += joiner;
    entry.text += tgt[p.target];
    entry.target_indices.push_back(p.target);
  }
  for (auto& entry : entries) {
    if (entry.target_indices.empty()) {
      entry.text = options.placeholder;
      entry.is_placeholder = true;
    }
  }
  return entries;
}

AlignedPair reconstruct(const SentenceList& src, const SentenceList& tgt,
                        const AlignmentPath& path, const ReconstructOptions& options) {
  AlignedPair out;
  out.tgt_reconstructed = reconstruct_entries(src.size(), tgt, path, options);
  out.src = src;
  out.path = path;
  out.placeholder = options.placeholder;
  out.src_joiner = joiner_for(options.joiner, src.language);
  out.tgt_joiner = joiner_for(options.joiner, tgt.language);
  out.ref_joiner = out.tgt_joiner;
  out.placeholder_count = static_cast<std::size_t>(
      std::count_if(out.tgt_reconstructed.begin(), out.tgt_reconstructed.end(),
                    [](const ReconstructedEntry& e) { return e.is_placeholder; }));
  return out;
}

namespace {

struct SideAlignment {
  SentenceList sentences;
  AlignmentPath path;
};

// Segments `doc` and aligns it onto `src`. An empty document yields an empty
// sentence list and an empty path.
SideAlignment align_side(const SentenceList& src, std::string_view doc, const std::string& lang,
                         const AlignConfig& config, const std::string& doc_id) {
  SideAlignment out;
  if (unicode::trim(unicode::nfc(doc)).empty()) {
    out.sentences.doc_id = doc_id;
    out.sentences.language = lang;
    return out;
  }
  out.sentences = segment(doc, lang, config.segmenter, doc_id);
  const auto matrix = build_matrix(src, out.sentences, *config.align_scorer, config.cache);
  out.path = dp_search(matrix, config.search);
  return out;
}

}  // namespace

AlignedPair align_document(std::string_view src_doc, std::string_view tgt_doc,
                           const Languages& langs, const AlignConfig& config,
                           std::optional<std::string_view> ref_doc, std::string doc_id) {
  if (!config.align_scorer) throw InvalidInput("align_document needs an alignment scorer");
  if (config.align_scorer->metric().reference_based()) {
    throw MetricContractError("alignment metric " + config.align_scorer->metric().str() +
                              " must be reference-free");
  }
  const SentenceList src = segment(src_doc, langs.src, config.segmenter, doc_id);

  const SideAlignment tgt = align_side(src, tgt_doc, langs.tgt, config, doc_id);
  AlignedPair out = reconstruct(src, tgt.sentences, tgt.path, config.reconstruct);

  if (ref_doc && config.align_reference) {
    SideAlignment ref = align_side(src, *ref_doc, langs.tgt, config, doc_id);
    out.ref_reconstructed = reconstruct_entries(src.size(), ref.sentences, ref.path,
                                                config.reconstruct);
    out.ref_path = std::move(ref.path);
  }
  return out;
}

}  // namespace docasd
