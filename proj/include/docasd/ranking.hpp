#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace docasd {

enum class Polarity { higher_is_better, lower_is_better };

Polarity parse_polarity(std::string_view text);
std::string_view to_string(Polarity polarity);

struct SystemScore {
  std::string system;
  double score = 0.0;
  double rank = 0.0;  // 1 = best; exact ties share their average rank
  bool operator==(const SystemScore&) const = default;
};

// Systems are returned in input order with their ranks filled in.
std::vector<SystemScore> rank_systems(const std::vector<std::pair<std::string, double>>& scores,
                                      Polarity polarity = Polarity::higher_is_better);

// Average ("fractional") ranks, 1 = largest value for higher_is_better.
std::vector<double> fractional_ranks(std::span<const double> values, Polarity polarity);

double pearson(std::span<const double> x, std::span<const double> y);

// Kendall tau-b; equals tau-a when neither side has ties.
double kendall(std::span<const double> x, std::span<const double> y);

struct HumanRanking {
  std::map<std::string, double> rank;
  std::map<std::string, double> score;  // optional raw human scores
  Polarity score_polarity = Polarity::lower_is_better;
};

struct CorrelationReport {
  double pearson_on_ranks = 0.0;
  double kendall_tau = 0.0;
  std::size_t systems = 0;
  // Pearson between raw automatic and raw human scores, sign-adjusted so
  // that agreement is positive. Present when both sides carry scores.
  std::optional<double> pearson_raw;
};

CorrelationReport correlate_rankings(const HumanRanking& human,
                                     const std::vector<SystemScore>& automatic);

}  // namespace docasd
