#include "docasd/scorer.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <unordered_map>

#include "docasd/digest.hpp"
#include "docasd/error.hpp"
#include "docasd/log.hpp"
#include "docasd/matrix_cache.hpp"
#include "docasd/remote_scorer.hpp"
#include "docasd/unicode.hpp"
#include "json.hpp"

namespace docasd {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = [](const std::string& msg) {
    std::cerr << "[docasd] warning: " << msg << '\n';
  };
  return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink next) {
  std::lock_guard lock(sink_mutex());
  std::swap(sink(), next);
  return next;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

MetricId MetricId::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string arg = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  auto require_arg = [&](MetricKind kind) {
    if (arg.empty()) {
      throw InvalidInput("metric '" + std::string(text) + "' needs an argument after ':'");
    }
    return MetricId{kind, arg};
  };
  auto forbid_arg = [&](MetricKind kind) {
    if (colon != std::string_view::npos) {
      throw InvalidInput("metric '" + std::string(head) + "' takes no argument");
    }
    return MetricId{kind, {}};
  };
  if (head == "lexical") return forbid_arg(MetricKind::lexical);
  if (head == "asd-align") return forbid_arg(MetricKind::asd_align);
  if (head == "qe-remote") return require_arg(MetricKind::qe_remote);
  if (head == "ref-remote") return require_arg(MetricKind::ref_remote);
  if (head == "oracle-matrix") return require_arg(MetricKind::oracle_matrix);
  throw InvalidInput("unknown metric '" + std::string(text) +
                     "' (expected lexical, asd-align, qe-remote:<model>, "
                     "ref-remote:<model> or oracle-matrix:<path>)");
}

MetricId MetricId::resolve() const {
  if (kind == MetricKind::asd_align) return {MetricKind::qe_remote, std::string(kDefaultAlignModel)};
  return *this;
}

std::string MetricId::str() const {
  switch (kind) {
    case MetricKind::asd_align:
      return "asd-align";
    case MetricKind::qe_remote:
      return "qe-remote:" + argument;
    case MetricKind::ref_remote:
      return "ref-remote:" + argument;
    case MetricKind::lexical:
      return "lexical";
    case MetricKind::oracle_matrix:
      return "oracle-matrix:" + argument;
    case MetricKind::custom:
      return "custom:" + argument;
  }
  return "unknown";
}

bool MetricId::reference_based() const {
  if (kind == MetricKind::custom) return custom_reference_based;
  return kind == MetricKind::ref_remote;
}

bool MetricId::remote() const {
  return kind == MetricKind::qe_remote || kind == MetricKind::ref_remote ||
         kind == MetricKind::asd_align;
}

double lexical_similarity(std::string_view a, std::string_view b) {
  auto bigrams = [](std::string_view text) {
    const auto cps = unicode::decode(unicode::lower(text));
    std::unordered_map<std::uint64_t, double> counts;
    for (std::size_t i = 1; i < cps.size(); ++i) {
      counts[(static_cast<std::uint64_t>(cps[i - 1].value) << 32) | cps[i].value] += 1.0;
    }
    return counts;
  };
  const auto ca = bigrams(a);
  const auto cb = bigrams(b);
  if (ca.empty() || cb.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [key, count] : ca) {
    na += count * count;
    if (auto it = cb.find(key); it != cb.end()) dot += count * it->second;
  }
  for (const auto& [key, count] : cb) nb += count * count;
  // Integer-valued products are exact, so identical inputs give exactly 1.
  return dot / std::sqrt(na * nb);
}

std::vector<double> Scorer::score_batch(std::span<const ScoreItem> items) const {
  const bool needs_ref = metric_.reference_based();
  std::vector<ScoreItem> stripped;
  std::span<const ScoreItem> to_score = items;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (unicode::trim(items[i].src).empty()) {
      throw MetricContractError("score item " + std::to_string(i) + " has an empty source");
    }
    if (needs_ref && !items[i].ref) {
      throw MetricContractError("metric " + metric_.str() + " is reference-based but item " +
                                std::to_string(i) + " has no reference");
    }
  }
  if (!needs_ref) {
    bool any_ref = false;
    for (const auto& item : items) any_ref = any_ref || item.ref.has_value();
    if (any_ref) {
      stripped.assign(items.begin(), items.end());
      for (auto& item : stripped) item.ref.reset();
      to_score = stripped;
    }
  }
  if (to_score.empty()) return {};
  std::vector<double> scores = score_items(to_score);
  if (scores.size() != items.size()) {
    throw MetricContractError("metric " + metric_.str() + " returned " +
                              std::to_string(scores.size()) + " scores for " +
                              std::to_string(items.size()) + " items");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw MetricContractError("metric " + metric_.str() + " returned a non-finite score for item " +
                                std::to_string(i));
    }
  }
  return scores;
}

std::vector<double> LexicalScorer::score_items(std::span<const ScoreItem> items) const {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(lexical_similarity(item.src, item.mt));
  return out;
}

OracleScorer::OracleScorer(MetricId id,
                           std::map<std::pair<std::string, std::string>, double> table,
                           std::optional<double> fallback)
    : Scorer(std::move(id)), table_(std::move(table)), fallback_(fallback) {}

namespace {

std::map<std::pair<std::string, std::string>, double> load_oracle_table(
    const std::string& path, std::optional<double>& fallback) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open oracle fixture '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("oracle fixture '" + path + "': " + e.what());
  }
  std::map<std::pair<std::string, std::string>, double> table;
  auto key = [](const std::string& s) { return std::string(unicode::trim(unicode::nfc(s))); };
  try {
    if (doc.contains("values")) {
      const auto src = doc.at("src").get<std::vector<std::string>>();
      const auto tgt = doc.at("tgt").get<std::vector<std::string>>();
      const auto values = doc.at("values").get<std::vector<std::vector<double>>>();
      if (values.size() != src.size()) {
        throw InvalidInput("oracle fixture '" + path + "': grid has " +
                           std::to_string(values.size()) + " rows for " +
                           std::to_string(src.size()) + " source sentences");
      }
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (values[i].size() != tgt.size()) {
          throw InvalidInput("oracle fixture '" + path + "': row " + std::to_string(i) +
                             " has the wrong width");
        }
        for (std::size_t j = 0; j < tgt.size(); ++j) {
          table[{key(src[i]), key(tgt[j])}] = values[i][j];
        }
      }
    }
    if (doc.contains("pairs")) {
      for (const auto& entry : doc.at("pairs")) {
        table[{key(entry.at("src").get<std::string>()), key(entry.at("mt").get<std::string>())}] =
            entry.at("score").get<double>();
      }
    }
    if (doc.contains("default")) fallback = doc.at("default").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("oracle fixture '" + path + "': " + e.what());
  }
  return table;
}

}  // namespace

OracleScorer::OracleScorer(const std::string& fixture_path)
    : Scorer(MetricId{MetricKind::oracle_matrix, fixture_path}) {
  table_ = load_oracle_table(fixture_path, fallback_);
}

std::vector<double> OracleScorer::score_items(std::span<const ScoreItem> items) const {
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    const auto it = table_.find({std::string(unicode::trim(item.src)), std::string(unicode::trim(item.mt))});
    if (it != table_.end()) {
      out.push_back(it->second);
    } else if (fallback_) {
      out.push_back(*fallback_);
    } else {
      throw MetricContractError("oracle fixture " + metric().argument + " has no score for (" +
                                item.src + " | " + item.mt + ")");
    }
  }
  return out;
}

ScorerPtr make_scorer(const MetricId& metric, const RemoteOptions& remote) {
  const MetricId resolved = metric.resolve();
  switch (resolved.kind) {
    case MetricKind::lexical:
      return std::make_shared<LexicalScorer>();
    case MetricKind::oracle_matrix:
      return std::make_shared<OracleScorer>(resolved.argument);
    case MetricKind::qe_remote:
    case MetricKind::ref_remote:
      return std::make_shared<RemoteScorer>(resolved, remote);
    case MetricKind::asd_align:
    case MetricKind::custom:
      break;
  }
  throw InvalidInput("metric " + metric.str() + " cannot be constructed by name");
}

SimilarityMatrix SimilarityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  SimilarityMatrix out;
  out.m = rows.size();
  out.n = rows.empty() ? 0 : rows.front().size();
  for (const auto& row : rows) {
    if (row.size() != out.n) throw InvalidInput("ragged similarity matrix rows");
    out.values.insert(out.values.end(), row.begin(), row.end());
  }
  return out;
}

std::string digest(const SentenceList& list) {
  std::string buf = list.language;
  buf.push_back('\x1e');
  for (const auto& s : list.sentences) {
    buf += s;
    buf.push_back('\x1f');
  }
  return sha256_hex(buf);
}

SimilarityMatrix build_matrix(const SentenceList& src, const SentenceList& tgt,
                              const Scorer& scorer, const MatrixCache* cache) {
  if (src.empty() || tgt.empty()) {
    throw InvalidInput("similarity matrix needs at least one source and one target sentence");
  }
  SimilarityMatrix matrix;
  matrix.m = src.size();
  matrix.n = tgt.size();
  matrix.metric = scorer.metric().str();
  matrix.src_digest = digest(src);
  matrix.tgt_digest = digest(tgt);

  if (cache) {
    if (auto hit = cache->load(matrix.src_digest, matrix.tgt_digest, matrix.metric)) return *hit;
  }

  std::vector<ScoreItem> items;
  items.reserve(matrix.m * matrix.n);
  for (std::size_t i = 0; i < matrix.m; ++i) {
    for (std::size_t j = 0; j < matrix.n; ++j) items.push_back({src[i], tgt[j], std::nullopt});
  }
  matrix.values = scorer.score_batch(items);

  if (cache) cache->store(matrix);
  return matrix;
}

}  // namespace docasd
