#include "docasd/matrix_cache.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "docasd/digest.hpp"
#include "docasd/error.hpp"
#include "docasd/log.hpp"
#include "json.hpp"

namespace docasd {

namespace fs = std::filesystem;

MatrixCache::MatrixCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw InvalidInput("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

fs::path MatrixCache::path_for(const std::string& src_digest, const std::string& tgt_digest,
                               const std::string& metric) const {
  return dir_ / (sha256_hex(src_digest + "|" + tgt_digest + "|" + metric) + ".json");
}

std::optional<SimilarityMatrix> MatrixCache::load(const std::string& src_digest,
                                                  const std::string& tgt_digest,
                                                  const std::string& metric) const {
  const fs::path path = path_for(src_digest, tgt_digest, metric);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    SimilarityMatrix out;
    out.metric = doc.at("metric").get<std::string>();
    out.src_digest = doc.at("src_digest").get<std::string>();
    out.tgt_digest = doc.at("tgt_digest").get<std::string>();
    out.m = doc.at("m").get<std::size_t>();
    out.n = doc.at("n").get<std::size_t>();
    const auto rows = doc.at("values").get<std::vector<std::vector<double>>>();
    if (out.metric != metric || out.src_digest != src_digest || out.tgt_digest != tgt_digest ||
        rows.size() != out.m) {
      throw std::runtime_error("header does not match the requested key");
    }
    for (const auto& row : rows) {
      if (row.size() != out.n) throw std::runtime_error("ragged row");
      for (double v : row) {
        if (!std::isfinite(v)) throw std::runtime_error("non-finite value");
      }
      out.values.insert(out.values.end(), row.begin(), row.end());
    }
    return out;
  } catch (const std::exception& e) {
    warn("ignoring corrupt matrix cache entry " + path.string() + " (" + e.what() +
         "); recomputing");
    return std::nullopt;
  }
}

void MatrixCache::store(const SimilarityMatrix& matrix) const {
  nlohmann::json doc;
  doc["kind"] = "similarity_matrix";
  doc["metric"] = matrix.metric;
  doc["src_digest"] = matrix.src_digest;
  doc["tgt_digest"] = matrix.tgt_digest;
  doc["m"] = matrix.m;
  doc["n"] = matrix.n;
  auto& rows = doc["values"] = nlohmann::json::array();
  for (std::size_t i = 0; i < matrix.m; ++i) {
    rows.push_back(std::vector<double>(matrix.values.begin() + static_cast<std::ptrdiff_t>(i * matrix.n),
                                       matrix.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * matrix.n)));
  }

  const fs::path target = path_for(matrix.src_digest, matrix.tgt_digest, matrix.metric);
  static std::atomic<unsigned long> counter{0};
  std::ostringstream tmp_name;
  tmp_name << target.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
           << '.' << counter++;
  const fs::path tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump() << '\n';
    if (!out) {
      warn("could not write matrix cache entry " + tmp.string());
      return;
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    warn("could not publish matrix cache entry " + target.string() + ": " + ec.message());
    fs::remove(tmp, ec);
  }
}

}  // namespace docasd
