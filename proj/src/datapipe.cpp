#include "docasd/datapipe.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "docasd/error.hpp"
#include "docasd/log.hpp"
#include "json.hpp"

namespace docasd {

using ordered_json = nlohmann::ordered_json;

const std::string* DocRecord::candidate(const std::string& system) const {
  for (const auto& [name, text] : candidates) {
    if (name == system) return &text;
  }
  return nullptr;
}

namespace {

DocRecord parse_record(const ordered_json& j) {
  if (!j.is_object()) throw std::runtime_error("record is not a JSON object");
  DocRecord rec;
  rec.doc_id = j.at("doc_id").get<std::string>();
  rec.src = j.at("src").get<std::string>();
  rec.langs.src = j.at("src_lang").get<std::string>();
  rec.langs.tgt = j.at("tgt_lang").get<std::string>();
  if (j.contains("ref") && !j.at("ref").is_null()) rec.ref = j.at("ref").get<std::string>();
  const bool has_candidates = j.contains("candidates");
  const bool has_tgt = j.contains("tgt");
  if (has_candidates == has_tgt) {
    throw std::runtime_error("exactly one of 'candidates' or 'tgt' is required");
  }
  if (has_candidates) {
    const auto& c = j.at("candidates");
    if (!c.is_object()) throw std::runtime_error("'candidates' must be an object");
    for (const auto& [name, text] : c.items()) rec.candidates.emplace_back(name, text.get<std::string>());
  } else {
    const std::string system = j.contains("system") ? j.at("system").get<std::string>() : "system";
    rec.candidates.emplace_back(system, j.at("tgt").get<std::string>());
  }
  if (rec.candidates.empty()) throw std::runtime_error("record has no candidates");
  return rec;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<DocRecord> parse_corpus(std::istream& in) {
  std::vector<DocRecord> records;
  std::vector<std::string> problems;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      DocRecord rec = parse_record(ordered_json::parse(line));
      if (!ids.insert(rec.doc_id).second) {
        throw std::runtime_error("duplicate doc_id '" + rec.doc_id + "'");
      }
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      problems.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "corpus has " + std::to_string(problems.size()) + " malformed line(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InvalidInput(msg);
  }
  if (records.empty()) throw InvalidInput("corpus is empty");
  return records;
}

ASDResult Pipeline::evaluate_text(std::string_view src, std::string_view hyp,
                                  const Languages& langs, std::optional<std::string_view> ref,
                                  std::string doc_id) const {
  if (!eval_scorer) throw InvalidInput("pipeline has no evaluation scorer");
  AlignConfig config = align;
  config.align_reference = eval_scorer->metric().reference_based();
  if (config.align_reference && !ref) {
    throw MetricContractError("metric " + eval_scorer->metric().str() +
                              " needs a reference document");
  }
  const AlignedPair pair = align_document(src, hyp, langs, config, ref, std::move(doc_id));
  return asd_score(pair, *eval_scorer, ks);
}

ASDResult Pipeline::evaluate(const DocRecord& record, const std::string& system) const {
  const std::string* text = record.candidate(system);
  if (!text) throw InvalidInput("record " + record.doc_id + " has no candidate '" + system + "'");
  std::optional<std::string_view> ref;
  if (record.ref) ref = *record.ref;
  return evaluate_text(record.src, *text, record.langs, ref, record.doc_id);
}

Selection select_best(const DocRecord& record, const Pipeline& pipeline) {
  if (record.candidates.empty()) throw InvalidInput("record " + record.doc_id + " has no candidates");
  std::optional<Selection> best;
  std::vector<std::string> failures;
  for (const auto& [system, text] : record.candidates) {
    try {
      ASDResult result = pipeline.evaluate(record, system);
      if (!best || result.final_score > best->result.final_score) {
        best = Selection{system, std::move(result), {}};
      } else if (result.final_score == best->result.final_score) {
        warn(record.doc_id + ": " + system + " ties with " + best->system + ", keeping " + best->system);
      }
    } catch (const ScorerUnavailable&) {
      throw;
    } catch (const Error& e) {
      failures.push_back(system + ": " + e.what());
    }
  }
  if (!best) {
    std::string reason = "every candidate of " + record.doc_id + " failed";
    for (const auto& f : failures) reason += "; " + f;
    throw RecordSkipped(reason);
  }
  best->failures = std::move(failures);
  return *best;
}

std::optional<PreferenceTriplet> build_preference_pairs(const DocRecord& record,
                                                        const std::string& system_a,
                                                        const std::string& system_b,
                                                        const Pipeline& pipeline, double margin) {
  if (margin < 0.0) throw InvalidInput("preference margin must be non-negative");
  const std::string* text_a = record.candidate(system_a);
  const std::string* text_b = record.candidate(system_b);
  if (!text_a || !text_b) {
    throw InvalidInput("record " + record.doc_id + " lacks candidate '" +
                       (text_a ? system_b : system_a) + "'");
  }
  const double score_a = pipeline.evaluate(record, system_a).final_score;
  const double score_b = pipeline.evaluate(record, system_b).final_score;
  if (!(std::abs(score_a - score_b) > margin)) return std::nullopt;

  const bool a_wins = score_a > score_b;
  PreferenceTriplet t;
  t.src = record.src;
  t.chosen = a_wins ? *text_a : *text_b;
  t.rejected = a_wins ? *text_b : *text_a;
  t.score_chosen = a_wins ? score_a : score_b;
  t.score_rejected = a_wins ? score_b : score_a;
  t.margin = t.score_chosen - t.score_rejected;
  if (t.chosen == t.rejected) return std::nullopt;
  return t;
}

RewardResult reward(std::string_view src, std::string_view hyp, const Languages& langs,
                    const Pipeline& pipeline, const RewardOptions& options) {
  try {
    if (pipeline.eval_scorer && pipeline.eval_scorer->metric().reference_based()) {
      throw MetricContractError("reward needs a reference-free metric, got " +
                                pipeline.eval_scorer->metric().str());
    }
    return {pipeline.evaluate_text(src, hyp, langs).final_score, std::nullopt};
  } catch (const std::exception& e) {
    return {options.failure_reward, std::string(e.what())};
  }
}

std::vector<RewardResult> reward_batch(std::string_view src, const std::vector<std::string>& hyps,
                                       const Languages& langs, const Pipeline& pipeline,
                                       const RewardOptions& options) {
  std::vector<RewardResult> out;
  out.reserve(hyps.size());
  for (const auto& hyp : hyps) out.push_back(reward(src, hyp, langs, pipeline, options));
  return out;
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!stop.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::vector<std::size_t> order_by_doc_id(const std::vector<DocRecord>& records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].doc_id < records[b].doc_id;
  });
  return order;
}

}  // namespace

CorpusEvaluation evaluate_corpus(const std::vector<DocRecord>& records, const Pipeline& pipeline,
                                 std::size_t workers) {
  struct Slot {
    std::vector<DocumentResult> docs;
    std::vector<SkippedDocument> skipped;
  };
  std::vector<Slot> slots(records.size());
  parallel_for(records.size(), workers, [&](std::size_t r) {
    const DocRecord& rec = records[r];
    for (const auto& [system, text] : rec.candidates) {
      try {
        slots[r].docs.push_back({rec.doc_id, system, pipeline.evaluate(rec, system)});
      } catch (const ScorerUnavailable&) {
        throw;
      } catch (const Error& e) {
        warn("skipping " + rec.doc_id + " / " + system + ": " + e.what());
        slots[r].skipped.push_back({rec.doc_id, system, e.what()});
      }
    }
  });
  CorpusEvaluation out;
  for (std::size_t r : order_by_doc_id(records)) {
    std::move(slots[r].docs.begin(), slots[r].docs.end(), std::back_inserter(out.documents));
    std::move(slots[r].skipped.begin(), slots[r].skipped.end(), std::back_inserter(out.skipped));
  }
  return out;
}

std::vector<std::pair<std::string, double>> system_means(const std::vector<DocumentResult>& docs) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& d : docs) {
    auto [it, inserted] = acc.try_emplace(d.system, 0.0, 0);
    if (inserted) order.push_back(d.system);
    it->second.first += d.result.final_score;
    it->second.second += 1;
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& name : order) {
    const auto& [sum, count] = acc.at(name);
    out.emplace_back(name, sum / static_cast<double>(count));
  }
  return out;
}

PreferenceRun generate_preferences(const std::vector<DocRecord>& records, const Pipeline& pipeline,
                                   double margin, std::size_t workers, const std::string& system_a,
                                   const std::string& system_b) {
  struct Slot {
    std::optional<PreferenceTriplet> triplet;
    bool filtered = false;
    std::optional<SkippedDocument> skipped;
  };
  std::vector<Slot> slots(records.size());
  parallel_for(records.size(), workers, [&](std::size_t r) {
    const DocRecord& rec = records[r];
    std::string a = system_a, b = system_b;
    if (a.empty() || b.empty()) {
      if (rec.candidates.size() < 2) {
        slots[r].skipped = SkippedDocument{rec.doc_id, "", "fewer than two candidates"};
        return;
      }
      a = rec.candidates[0].first;
      b = rec.candidates[1].first;
    }
    try {
      slots[r].triplet = build_preference_pairs(rec, a, b, pipeline, margin);
      slots[r].filtered = !slots[r].triplet.has_value();
    } catch (const ScorerUnavailable&) {
      throw;
    } catch (const Error& e) {
      warn("skipping " + rec.doc_id + ": " + e.what());
      slots[r].skipped = SkippedDocument{rec.doc_id, a + "|" + b, e.what()};
    }
  });
  PreferenceRun out;
  for (std::size_t r : order_by_doc_id(records)) {
    if (slots[r].triplet) out.triplets.push_back(std::move(*slots[r].triplet));
    if (slots[r].filtered) ++out.filtered;
    if (slots[r].skipped) out.skipped.push_back(std::move(*slots[r].skipped));
  }
  return out;
}

void write_triplet_jsonl(std::ostream& out, const PreferenceTriplet& t) {
  ordered_json j;
  j["src"] = t.src;
  j["chosen"] = t.chosen;
  j["rejected"] = t.rejected;
  j["score_chosen"] = t.score_chosen;
  j["score_rejected"] = t.score_rejected;
  out << j.dump() << '\n';
}

}  // namespace docasd
