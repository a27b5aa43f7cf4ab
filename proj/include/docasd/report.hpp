#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "docasd/datapipe.hpp"
#include "docasd/ranking.hpp"
#include "json.hpp"

namespace docasd {

struct ReportSystem {
  std::string system;
  std::optional<double> score;
  double rank = 0.0;
};

// A run report: one self-describing JSON document
//   {"format": "docasd-report/1", "polarity": ..., "config_echo": {...},
//    "documents": [...], "systems": [...], "skipped": [...]}
// Published ranking tables ship in the same format with only `systems`.
struct Report {
  nlohmann::ordered_json config_echo = nlohmann::ordered_json::object();
  Polarity polarity = Polarity::higher_is_better;
  std::vector<DocumentResult> documents;
  std::vector<ReportSystem> systems;
  std::vector<SkippedDocument> skipped;
};

inline constexpr std::string_view kReportFormat = "docasd-report/1";

nlohmann::ordered_json to_json(const ASDResult& result);
ASDResult asd_result_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const Report& report);
Report report_from_json(const nlohmann::ordered_json& j);

void write_report(std::ostream& out, const Report& report);
Report read_report(std::istream& in);
Report read_report_file(const std::string& path);

std::vector<ReportSystem> to_report_systems(const std::vector<SystemScore>& scores);

// Recomputes system scores and ranks from the per-document results (or
// from the stored system scores when the report has no documents).
std::vector<SystemScore> rerank(const Report& report);

// Systems as the automatic side of a correlation, using the stored ranks.
std::vector<SystemScore> ranked_systems(const Report& report);

HumanRanking human_ranking(const Report& report);

// system<TAB>score<TAB>rank, with a header line.
void write_systems_tsv(std::ostream& out, const std::vector<ReportSystem>& systems);

}  // namespace docasd
