#include "docasd/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "docasd/error.hpp"

namespace docasd {

Polarity parse_polarity(std::string_view text) {
  if (text == "higher" || text == "higher-is-better") return Polarity::higher_is_better;
  if (text == "lower" || text == "lower-is-better") return Polarity::lower_is_better;
  throw InvalidInput("unknown polarity '" + std::string(text) + "'");
}

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::higher_is_better ? "higher-is-better" : "lower-is-better";
}

std::vector<double> fractional_ranks(std::span<const double> values, Polarity polarity) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return polarity == Polarity::higher_is_better ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share rank mean(i+1 .. j+1)
    const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t p = i; p <= j; ++p) ranks[order[p]] = shared;
    i = j + 1;
  }
  return ranks;
}

std::vector<SystemScore> rank_systems(const std::vector<std::pair<std::string, double>>& scores,
                                      Polarity polarity) {
  if (scores.size() < 2) throw InvalidInput("ranking needs at least two systems");
  std::set<std::string> seen;
  std::vector<double> values;
  values.reserve(scores.size());
  for (const auto& [name, score] : scores) {
    if (!seen.insert(name).second) throw InvalidInput("duplicate system name '" + name + "'");
    if (!std::isfinite(score)) throw InvalidInput("system '" + name + "' has a non-finite score");
    values.push_back(score);
  }
  const auto ranks = fractional_ranks(values, polarity);
  std::vector<SystemScore> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back({scores[i].first, scores[i].second, ranks[i]});
  }
  return out;
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidInput("correlation inputs differ in length");
  if (x.size() < 2) throw InvalidInput("correlation needs at least two observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidInput("correlation inputs must be finite");
    }
  }
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double kendall(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + ties_x) *
                                 static_cast<double>(concordant + discordant + ties_y));
  if (denom == 0.0) throw DegenerateInput("kendall: zero variance");
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

CorrelationReport correlate_rankings(const HumanRanking& human,
                                     const std::vector<SystemScore>& automatic) {
  std::set<std::string> auto_names, human_names;
  for (const auto& s : automatic) {
    if (!auto_names.insert(s.system).second) {
      throw InvalidInput("duplicate system '" + s.system + "' in automatic ranking");
    }
  }
  for (const auto& [name, rank] : human.rank) human_names.insert(name);
  if (auto_names != human_names) {
    std::string diff;
    for (const auto& n : auto_names) {
      if (!human_names.contains(n)) diff += " +" + n;
    }
    for (const auto& n : human_names) {
      if (!auto_names.contains(n)) diff += " -" + n;
    }
    throw InvalidInput("system sets differ (+ automatic only, - human only):" + diff);
  }

  std::vector<double> auto_ranks, human_ranks, auto_scores, human_scores;
  for (const auto& s : automatic) {
    auto_ranks.push_back(s.rank);
    human_ranks.push_back(human.rank.at(s.system));
    if (auto it = human.score.find(s.system); it != human.score.end()) {
      auto_scores.push_back(s.score);
      human_scores.push_back(it->second);
    }
  }

  CorrelationReport out;
  out.systems = automatic.size();
  out.pearson_on_ranks = pearson(auto_ranks, human_ranks);
  out.kendall_tau = kendall(auto_ranks, human_ranks);
  if (human_scores.size() == automatic.size()) {
    try {
      const double r = pearson(auto_scores, human_scores);
      out.pearson_raw = human.score_polarity == Polarity::lower_is_better ? -r : r;
    } catch (const DegenerateInput&) {
      out.pearson_raw.reset();
    }
  }
  return out;
}

}  // namespace docasd
