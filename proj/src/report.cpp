#include "docasd/report.hpp"

#include <fstream>
#include <iomanip>

#include "docasd/error.hpp"

namespace docasd {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const ASDResult& result) {
  ordered_json j;
  j["doc_id"] = result.doc_id;
  j["metric"] = result.metric;
  j["final"] = result.final_score;
  j["placeholder_count"] = result.placeholder_count;
  auto& per_k = j["per_k"] = ordered_json::object();
  for (const auto& [k, set] : result.per_k) {
    per_k[std::to_string(k)] = ordered_json{{"mean", set.mean}, {"unit_scores", set.unit_scores}};
  }
  return j;
}

ASDResult asd_result_from_json(const ordered_json& j) {
  ASDResult r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.final_score = j.at("final").get<double>();
  r.placeholder_count = j.value("placeholder_count", std::size_t{0});
  for (const auto& [key, value] : j.at("per_k").items()) {
    ChunkScoreSet set;
    set.k = std::stoul(key);
    set.mean = value.at("mean").get<double>();
    set.unit_scores = value.at("unit_scores").get<std::vector<double>>();
    r.per_k.emplace(set.k, std::move(set));
  }
  return r;
}

ordered_json to_json(const Report& report) {
  ordered_json j;
  j["format"] = kReportFormat;
  j["polarity"] = to_string(report.polarity);
  j["config_echo"] = report.config_echo;
  auto& docs = j["documents"] = ordered_json::array();
  for (const auto& d : report.documents) {
    ordered_json entry = to_json(d.result);
    entry["system"] = d.system;
    entry["doc_id"] = d.doc_id;
    docs.push_back(std::move(entry));
  }
  auto& systems = j["systems"] = ordered_json::array();
  for (const auto& s : report.systems) {
    ordered_json entry{{"system", s.system}};
    if (s.score) entry["score"] = *s.score;
    entry["rank"] = s.rank;
    systems.push_back(std::move(entry));
  }
  auto& skipped = j["skipped"] = ordered_json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back({{"doc_id", s.doc_id}, {"system", s.system}, {"reason", s.reason}});
  }
  return j;
}

Report report_from_json(const ordered_json& j) {
  Report r;
  try {
    if (j.contains("format") && j.at("format").get<std::string>() != kReportFormat) {
      throw InvalidInput("unsupported report format '" + j.at("format").get<std::string>() + "'");
    }
    if (j.contains("polarity")) r.polarity = parse_polarity(j.at("polarity").get<std::string>());
    if (j.contains("config_echo")) r.config_echo = j.at("config_echo");
    if (j.contains("documents")) {
      for (const auto& d : j.at("documents")) {
        r.documents.push_back(
            {d.at("doc_id").get<std::string>(), d.at("system").get<std::string>(), asd_result_from_json(d)});
      }
    }
    if (j.contains("systems")) {
      for (const auto& s : j.at("systems")) {
        ReportSystem sys;
        sys.system = s.at("system").get<std::string>();
        if (s.contains("score") && !s.at("score").is_null()) sys.score = s.at("score").get<double>();
        sys.rank = s.at("rank").get<double>();
        r.systems.push_back(std::move(sys));
      }
    }
    if (j.contains("skipped")) {
      for (const auto& s : j.at("skipped")) {
        r.skipped.push_back({s.at("doc_id").get<std::string>(), s.value("system", std::string{}),
                             s.value("reason", std::string{})});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed report: ") + e.what());
  }
  return r;
}

void write_report(std::ostream& out, const Report& report) { out << to_json(report).dump(2) << '\n'; }

Report read_report(std::istream& in) {
  try {
    return report_from_json(ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("report is not valid JSON: ") + e.what());
  }
}

Report read_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open report '" + path + "'");
  try {
    return read_report(in);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

std::vector<ReportSystem> to_report_systems(const std::vector<SystemScore>& scores) {
  std::vector<ReportSystem> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back({s.system, s.score, s.rank});
  return out;
}

std::vector<SystemScore> rerank(const Report& report) {
  if (!report.documents.empty()) {
    return rank_systems(system_means(report.documents), report.polarity);
  }
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& s : report.systems) {
    if (!s.score) throw InvalidInput("system '" + s.system + "' has no score to rank by");
    scores.emplace_back(s.system, *s.score);
  }
  return rank_systems(scores, report.polarity);
}

std::vector<SystemScore> ranked_systems(const Report& report) {
  if (report.systems.empty()) throw InvalidInput("report has no systems section");
  std::vector<SystemScore> out;
  for (const auto& s : report.systems) out.push_back({s.system, s.score.value_or(0.0), s.rank});
  return out;
}

HumanRanking human_ranking(const Report& report) {
  if (report.systems.empty()) throw InvalidInput("human ranking has no systems");
  HumanRanking h;
  h.score_polarity = report.polarity;
  bool all_scored = true;
  for (const auto& s : report.systems) {
    if (!h.rank.emplace(s.system, s.rank).second) {
      throw InvalidInput("duplicate system '" + s.system + "' in human ranking");
    }
    all_scored = all_scored && s.score.has_value();
  }
  if (all_scored) {
    for (const auto& s : report.systems) h.score.emplace(s.system, *s.score);
  }
  return h;
}

void write_systems_tsv(std::ostream& out, const std::vector<ReportSystem>& systems) {
  out << "system\tscore\trank\n";
  for (const auto& s : systems) {
    out << s.system << '\t';
    if (s.score) {
      out << std::fixed << std::setprecision(4) << *s.score << std::defaultfloat;
    } else {
      out << '-';
    }
    out << '\t' << s.rank << '\n';
  }
}

}  // namespace docasd
