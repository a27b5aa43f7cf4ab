#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "docasd/alignment.hpp"
#include "docasd/datapipe.hpp"
#include "docasd/error.hpp"
#include "docasd/matrix_cache.hpp"
#include "docasd/report.hpp"
#include "docasd/segmentation.hpp"
#include "docasd/slide_eval.hpp"

namespace docasd::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
  std::string metric_align = "asd-align";
  std::string metric_eval = "qe-remote:wmt22-cometkiwi-da";
  std::vector<std::size_t> ks = kDefaultChunkSizes;
  std::string dp_mode = "strict";
  bool forbid_zero_step = false;
  std::string placeholder;
  std::string joiner = "auto";
  std::string segmenter = "builtin";
  std::string segmenter_cmd;
  std::string sidecar_url = "http://127.0.0.1:8765";
  std::size_t batch_size = 64;
  std::string cache_dir;
  std::size_t workers = 1;
  bool strict = false;
};

struct Runtime {
  Pipeline pipeline;
  std::unique_ptr<MatrixCache> cache;
};

void add_pipeline_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--metric-align", cfg.metric_align,
                  "Alignment scorer: asd-align, lexical, qe-remote:<model>, oracle-matrix:<path>")
      ->envname("DOCASD_METRIC_ALIGN")
      ->capture_default_str();
  cmd->add_option("--metric-eval", cfg.metric_eval,
                  "Evaluation scorer: lexical, qe-remote:<model>, ref-remote:<model>, "
                  "oracle-matrix:<path>")
      ->envname("DOCASD_METRIC_EVAL")
      ->capture_default_str();
  cmd->add_option("--ks", cfg.ks, "Chunk sizes (subset of 1,2,3,4)")
      ->delimiter(',')
      ->check(CLI::Range(1, 4))
      ->envname("DOCASD_KS")
      ->capture_default_str();
  cmd->add_option("--dp-mode", cfg.dp_mode, "Path endpoints: strict or relaxed")
      ->check(CLI::IsMember({"strict", "relaxed"}))
      ->envname("DOCASD_DP_MODE")
      ->capture_default_str();
  cmd->add_flag("--forbid-zero-step", cfg.forbid_zero_step,
                "Require a new source sentence for every target sentence")
      ->envname("DOCASD_FORBID_ZERO_STEP");
  cmd->add_option("--placeholder", cfg.placeholder, "Text inserted for omitted sentences")
      ->envname("DOCASD_PLACEHOLDER");
  cmd->add_option("--joiner", cfg.joiner, "Glue between merged sentences: space, none, auto")
      ->check(CLI::IsMember({"space", "none", "auto"}))
      ->envname("DOCASD_JOINER")
      ->capture_default_str();
  cmd->add_option("--segmenter", cfg.segmenter, "builtin or external")
      ->check(CLI::IsMember({"builtin", "external"}))
      ->envname("DOCASD_SEGMENTER")
      ->capture_default_str();
  cmd->add_option("--segmenter-cmd", cfg.segmenter_cmd,
                  "External segmenter command; {lang} expands to the language code")
      ->envname("DOCASD_SEGMENTER_CMD");
  cmd->add_option("--sidecar-url", cfg.sidecar_url, "Scoring sidecar base URL")
      ->envname("DOCASD_SIDECAR_URL")
      ->capture_default_str();
  cmd->add_option("--batch-size", cfg.batch_size, "Items per sidecar request")
      ->check(CLI::PositiveNumber)
      ->envname("DOCASD_BATCH_SIZE")
      ->capture_default_str();
  cmd->add_option("--cache-dir", cfg.cache_dir, "Similarity matrix cache directory")
      ->envname("DOCASD_CACHE_DIR");
  cmd->add_option("--workers", cfg.workers, "Parallel documents")
      ->check(CLI::PositiveNumber)
      ->envname("DOCASD_WORKERS")
      ->capture_default_str();
}

SegmenterConfig segmenter_config(const RunConfig& cfg) {
  SegmenterConfig seg;
  if (cfg.segmenter == "external") {
    seg.backend = SegmenterBackend::external;
    if (cfg.segmenter_cmd.empty()) throw InvalidInput("--segmenter external needs --segmenter-cmd");
    seg.external_command = cfg.segmenter_cmd;
  }
  return seg;
}

Runtime make_runtime(const RunConfig& cfg) {
  Runtime rt;
  RemoteOptions remote;
  remote.sidecar_url = cfg.sidecar_url;
  remote.batch_size = cfg.batch_size;

  const MetricId align_id = MetricId::parse(cfg.metric_align);
  const MetricId eval_id = MetricId::parse(cfg.metric_eval);
  if (align_id.reference_based()) {
    throw InvalidInput("--metric-align must be reference-free, got " + align_id.str());
  }
  if (cfg.ks.empty()) throw InvalidInput("--ks must name at least one chunk size");

  if (!cfg.cache_dir.empty()) rt.cache = std::make_unique<MatrixCache>(cfg.cache_dir);

  auto& p = rt.pipeline;
  p.align.segmenter = segmenter_config(cfg);
  p.align.search = {parse_dp_mode(cfg.dp_mode), cfg.forbid_zero_step};
  p.align.reconstruct = {cfg.placeholder, parse_joiner_policy(cfg.joiner)};
  p.align.align_scorer = make_scorer(align_id, remote);
  p.align.cache = rt.cache.get();
  p.eval_scorer = make_scorer(eval_id, remote);
  p.ks = cfg.ks;
  std::sort(p.ks.begin(), p.ks.end());
  p.ks.erase(std::unique(p.ks.begin(), p.ks.end()), p.ks.end());
  return rt;
}

ordered_json config_echo(const RunConfig& cfg, const std::string& command) {
  ordered_json j;
  j["command"] = command;
  j["metric_align"] = MetricId::parse(cfg.metric_align).str();
  j["metric_eval"] = MetricId::parse(cfg.metric_eval).str();
  j["ks"] = cfg.ks;
  j["dp_mode"] = cfg.dp_mode;
  j["forbid_zero_step"] = cfg.forbid_zero_step;
  j["placeholder"] = cfg.placeholder;
  j["joiner"] = cfg.joiner;
  j["segmenter"] = cfg.segmenter;
  if (!cfg.segmenter_cmd.empty()) j["segmenter_cmd"] = cfg.segmenter_cmd;
  j["sidecar_url"] = cfg.sidecar_url;
  j["batch_size"] = cfg.batch_size;
  j["cache_dir"] = cfg.cache_dir;
  j["workers"] = cfg.workers;
  j["strict"] = cfg.strict;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<DocRecord> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open corpus '" + path + "'");
  try {
    return parse_corpus(in);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

// Writes to `path`, or to `fallback` when path is "-" or empty.
template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  fn(out);
}

std::string fmt3(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << v;
  return ss.str();
}

void print_entries(std::ostream& out, const char* label,
                   const std::vector<ReconstructedEntry>& entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out << label << '\t' << i << '\t';
    if (entries[i].is_placeholder) {
      out << "<placeholder>";
    } else {
      for (std::size_t t = 0; t < entries[i].target_indices.size(); ++t) {
        out << (t ? "+" : "") << entries[i].target_indices[t];
      }
    }
    out << '\t' << entries[i].text << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Document-level MT evaluation: align, slide, rank, and build training data", "docasd"};
  app.set_config("--config", "", "TOML/INI configuration file (flags override it)");
  app.require_subcommand(1);

  RunConfig cfg;

  // segment
  auto* seg_cmd = app.add_subcommand("segment", "Split a document into sentences");
  std::string seg_input, seg_lang = "en";
  bool seg_json = false;
  seg_cmd->add_option("--input", seg_input, "Document file")->required();
  seg_cmd->add_option("--lang", seg_lang, "Language code")->capture_default_str();
  seg_cmd->add_flag("--json", seg_json, "Emit sentences with byte spans as JSON");
  seg_cmd->add_option("--segmenter", cfg.segmenter)->check(CLI::IsMember({"builtin", "external"}));
  seg_cmd->add_option("--segmenter-cmd", cfg.segmenter_cmd)->envname("DOCASD_SEGMENTER_CMD");

  // align
  auto* align_cmd = app.add_subcommand("align", "Align a translation to its source and reconstruct it");
  std::string align_src, align_tgt, align_ref, align_src_lang = "en", align_tgt_lang = "en";
  bool align_json = false;
  align_cmd->add_option("--src", align_src, "Source document file")->required();
  align_cmd->add_option("--tgt", align_tgt, "Translation file")->required();
  align_cmd->add_option("--ref", align_ref, "Reference translation file");
  align_cmd->add_option("--src-lang", align_src_lang)->capture_default_str();
  align_cmd->add_option("--tgt-lang", align_tgt_lang)->capture_default_str();
  align_cmd->add_flag("--json", align_json, "Emit the alignment as JSON");
  add_pipeline_options(align_cmd, cfg);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a corpus and rank its systems");
  std::string corpus_path, report_path;
  bool eval_tsv = false;
  eval_cmd->add_option("--corpus", corpus_path, "JSONL corpus")->required()->envname("DOCASD_CORPUS");
  eval_cmd->add_option("--report", report_path, "Report file (default: stdout)")->envname("DOCASD_REPORT");
  eval_cmd->add_flag("--strict", cfg.strict, "Fail when any document is skipped")->envname("DOCASD_STRICT");
  eval_cmd->add_flag("--tsv", eval_tsv, "Also print the system table as TSV");
  add_pipeline_options(eval_cmd, cfg);

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "Re-rank the systems of an existing report");
  std::string rank_report;
  rank_cmd->add_option("--report", rank_report, "Report file")->required();

  // correlate
  auto* corr_cmd = app.add_subcommand("correlate", "Correlate automatic and human system rankings");
  std::string corr_auto, corr_human;
  corr_cmd->add_option("--auto", corr_auto, "Automatic report")->required();
  corr_cmd->add_option("--human", corr_human, "Human ranking file")->required();

  // prefpairs
  auto* pref_cmd = app.add_subcommand("prefpairs", "Build preference triplets from two candidates");
  std::string pref_corpus, pref_out, pref_a, pref_b;
  double pref_margin = 0.0;
  pref_cmd->add_option("--corpus", pref_corpus, "JSONL corpus")->required()->envname("DOCASD_CORPUS");
  pref_cmd->add_option("--out", pref_out, "Triplet JSONL (default: stdout)");
  pref_cmd->add_option("--margin", pref_margin, "Minimum score gap")->check(CLI::NonNegativeNumber);
  pref_cmd->add_option("--system-a", pref_a, "First system (default: first candidate)");
  pref_cmd->add_option("--system-b", pref_b, "Second system (default: second candidate)");
  pref_cmd->add_flag("--strict", cfg.strict, "Fail when any record is skipped");
  add_pipeline_options(pref_cmd, cfg);

  // best
  auto* best_cmd = app.add_subcommand("best", "Keep the highest-scoring candidate per document");
  std::string best_corpus, best_out;
  best_cmd->add_option("--corpus", best_corpus, "JSONL corpus")->required()->envname("DOCASD_CORPUS");
  best_cmd->add_option("--out", best_out, "Output JSONL (default: stdout)");
  best_cmd->add_flag("--strict", cfg.strict, "Fail when any record is skipped");
  add_pipeline_options(best_cmd, cfg);

  // reward
  auto* reward_cmd = app.add_subcommand("reward", "Score hypotheses against a source, one scalar each");
  std::string reward_src, reward_src_lang = "en", reward_tgt_lang = "en";
  std::vector<std::string> reward_hyps;
  double failure_reward = RewardOptions{}.failure_reward;
  reward_cmd->add_option("--src", reward_src, "Source document file")->required();
  reward_cmd->add_option("--hyp", reward_hyps, "Hypothesis file(s)")->required();
  reward_cmd->add_option("--src-lang", reward_src_lang)->capture_default_str();
  reward_cmd->add_option("--tgt-lang", reward_tgt_lang)->capture_default_str();
  reward_cmd->add_option("--failure-reward", failure_reward, "Reward reported when scoring fails")
      ->capture_default_str();
  add_pipeline_options(reward_cmd, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int rc = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return rc == 0 ? kSuccess : kUsage;
  }

  try {
    if (*seg_cmd) {
      const SentenceList list = segment(read_file(seg_input), seg_lang, segmenter_config(cfg));
      if (seg_json) {
        ordered_json j;
        j["language"] = list.language;
        auto& arr = j["sentences"] = ordered_json::array();
        for (std::size_t i = 0; i < list.size(); ++i) {
          arr.push_back({{"text", list[i]}, {"begin", list.spans[i].begin}, {"end", list.spans[i].end}});
        }
        out << j.dump(2) << '\n';
      } else {
        for (const auto& s : list.sentences) out << s << '\n';
      }
      return kSuccess;
    }

    if (*align_cmd) {
      Runtime rt = make_runtime(cfg);
      AlignConfig config = rt.pipeline.align;
      std::optional<std::string> ref_text;
      if (!align_ref.empty()) {
        ref_text = read_file(align_ref);
        config.align_reference = true;
      }
      std::optional<std::string_view> ref_view;
      if (ref_text) ref_view = *ref_text;
      const AlignedPair pair = align_document(read_file(align_src), read_file(align_tgt),
                                              {align_src_lang, align_tgt_lang}, config, ref_view);
      if (align_json) {
        ordered_json j;
        auto& path = j["path"] = ordered_json::array();
        for (const auto& p : pair.path.pairs) path.push_back({p.source, p.target});
        j["total"] = pair.path.total;
        j["placeholder_count"] = pair.placeholder_count;
        j["src"] = pair.src.sentences;
        auto entries = [](const std::vector<ReconstructedEntry>& es) {
          ordered_json arr = ordered_json::array();
          for (const auto& e : es) {
            arr.push_back({{"text", e.text}, {"target_indices", e.target_indices},
                           {"is_placeholder", e.is_placeholder}});
          }
          return arr;
        };
        j["tgt_reconstructed"] = entries(pair.tgt_reconstructed);
        if (pair.ref_reconstructed) j["ref_reconstructed"] = entries(*pair.ref_reconstructed);
        out << j.dump(2) << '\n';
      } else {
        out << "path";
        for (const auto& p : pair.path.pairs) out << " (" << p.source << "," << p.target << ")";
        out << "\ntotal\t" << pair.path.total << "\nplaceholders\t" << pair.placeholder_count << '\n';
        print_entries(out, "tgt", pair.tgt_reconstructed);
        if (pair.ref_reconstructed) print_entries(out, "ref", *pair.ref_reconstructed);
      }
      return kSuccess;
    }

    if (*eval_cmd) {
      const auto records = read_corpus(corpus_path);
      Runtime rt = make_runtime(cfg);
      const CorpusEvaluation eval = evaluate_corpus(records, rt.pipeline, cfg.workers);

      Report report;
      report.config_echo = config_echo(cfg, "evaluate");
      report.documents = eval.documents;
      report.skipped = eval.skipped;
      const auto means = system_means(eval.documents);
      if (means.size() >= 2) {
        report.systems = to_report_systems(rank_systems(means));
      } else if (means.size() == 1) {
        report.systems = {{means[0].first, means[0].second, 1.0}};
      }
      with_output(report_path, out, [&](std::ostream& o) { write_report(o, report); });
      if (eval_tsv) write_systems_tsv(out, report.systems);
      err << "evaluated " << eval.documents.size() << " document(s), skipped " << eval.skipped.size()
          << '\n';
      if (eval.documents.empty()) {
        err << "error: no document could be evaluated\n";
        return kDataError;
      }
      if (cfg.strict && !eval.skipped.empty()) return kDataError;
      return kSuccess;
    }

    if (*rank_cmd) {
      const Report report = read_report_file(rank_report);
      write_systems_tsv(out, to_report_systems(rerank(report)));
      return kSuccess;
    }

    if (*corr_cmd) {
      const Report auto_report = read_report_file(corr_auto);
      const Report human_report = read_report_file(corr_human);
      HumanRanking human = human_ranking(human_report);
      const bool auto_scored = std::all_of(auto_report.systems.begin(), auto_report.systems.end(),
                                           [](const ReportSystem& s) { return s.score.has_value(); });
      if (!auto_scored) human.score.clear();
      const CorrelationReport corr = correlate_rankings(human, ranked_systems(auto_report));
      out << "pearson_on_ranks=" << fmt3(corr.pearson_on_ranks) << " kendall=" << fmt3(corr.kendall_tau);
      if (corr.pearson_raw) out << " pearson_raw=" << fmt3(*corr.pearson_raw);
      out << " systems=" << corr.systems << '\n';
      return kSuccess;
    }

    if (*pref_cmd) {
      const auto records = read_corpus(pref_corpus);
      Runtime rt = make_runtime(cfg);
      const PreferenceRun run =
          generate_preferences(records, rt.pipeline, pref_margin, cfg.workers, pref_a, pref_b);
      with_output(pref_out, out, [&](std::ostream& o) {
        for (const auto& t : run.triplets) write_triplet_jsonl(o, t);
      });
      err << "triplets " << run.triplets.size() << ", filtered " << run.filtered << ", skipped "
          << run.skipped.size() << '\n';
      if (cfg.strict && !run.skipped.empty()) return kDataError;
      return kSuccess;
    }

    if (*best_cmd) {
      const auto records = read_corpus(best_corpus);
      Runtime rt = make_runtime(cfg);
      std::vector<std::optional<Selection>> picks(records.size());
      std::vector<std::string> skipped(records.size());
      parallel_for(records.size(), cfg.workers, [&](std::size_t r) {
        try {
          picks[r] = select_best(records[r], rt.pipeline);
        } catch (const RecordSkipped& e) {
          skipped[r] = e.what();
        }
      });
      std::size_t skip_count = 0;
      with_output(best_out, out, [&](std::ostream& o) {
        for (std::size_t r = 0; r < records.size(); ++r) {
          if (!picks[r]) {
            err << "skipped " << records[r].doc_id << ": " << skipped[r] << '\n';
            ++skip_count;
            continue;
          }
          ordered_json j;
          j["doc_id"] = records[r].doc_id;
          j["system"] = picks[r]->system;
          j["score"] = picks[r]->result.final_score;
          j["src"] = records[r].src;
          j["tgt"] = *records[r].candidate(picks[r]->system);
          j["src_lang"] = records[r].langs.src;
          j["tgt_lang"] = records[r].langs.tgt;
          o << j.dump() << '\n';
        }
      });
      if (cfg.strict && skip_count > 0) return kDataError;
      return kSuccess;
    }

    if (*reward_cmd) {
      Runtime rt = make_runtime(cfg);
      std::vector<std::string> hyps;
      for (const auto& path : reward_hyps) hyps.push_back(read_file(path));
      const auto rewards = reward_batch(read_file(reward_src), hyps, {reward_src_lang, reward_tgt_lang},
                                        rt.pipeline, RewardOptions{failure_reward});
      for (std::size_t i = 0; i < rewards.size(); ++i) {
        out << std::setprecision(17) << rewards[i].value << '\n';
        if (rewards[i].diagnostic) err << reward_hyps[i] << ": " << *rewards[i].diagnostic << '\n';
      }
      return kSuccess;
    }
  } catch (const ScorerUnavailable& e) {
    err << "error: " << e.what() << '\n';
    return kScorerUnavailable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace docasd::cli
