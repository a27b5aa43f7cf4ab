#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "docasd/scorer.hpp"

namespace docasd {

// Directory of JSON similarity matrices keyed by (src digest, tgt digest,
// metric). Writes go through a temp file and rename, so concurrent writers of
// the same key leave one complete file behind. Nothing is ever evicted.
class MatrixCache {
 public:
  explicit MatrixCache(std::filesystem::path dir);

  std::optional<SimilarityMatrix> load(const std::string& src_digest,
                                       const std::string& tgt_digest,
                                       const std::string& metric) const;
  void store(const SimilarityMatrix& matrix) const;

  std::filesystem::path path_for(const std::string& src_digest, const std::string& tgt_digest,
                                 const std::string& metric) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace docasd
