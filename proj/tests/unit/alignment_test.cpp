#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <random>

#include "docasd/alignment.hpp"
#include "docasd/error.hpp"
#include "test_support.hpp"

using namespace docasd;

namespace {

SimilarityMatrix random_matrix(std::mt19937& rng, std::size_t m, std::size_t n, bool integers) {
  std::uniform_real_distribution<double> real(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 2);
  SimilarityMatrix out;
  out.m = m;
  out.n = n;
  for (std::size_t i = 0; i < m * n; ++i) out.values.push_back(integers ? small(rng) : real(rng));
  return out;
}

std::vector<std::size_t> sources(const AlignmentPath& p) {
  std::vector<std::size_t> out;
  for (const auto& q : p.pairs) out.push_back(q.source);
  return out;
}

SentenceList sentences(std::vector<std::string> lines, std::string lang = "en") {
  SentenceList out;
  out.language = std::move(lang);
  out.sentences = std::move(lines);
  return out;
}

std::uint64_t binom(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

AlignConfig lexical_config() {
  AlignConfig c;
  c.align_scorer = std::make_shared<LexicalScorer>();
  return c;
}

}  // namespace

TEST(DpSearch, WorkedExampleOracleMatrix) {
  AlignConfig config;
  config.align_scorer = std::make_shared<OracleScorer>(testkit::fixture("worked_example/oracle.json"));
  std::ifstream s(testkit::fixture("worked_example/source.txt")), t(testkit::fixture("worked_example/target.txt"));
  const std::string src_doc((std::istreambuf_iterator<char>(s)), {});
  const std::string tgt_doc((std::istreambuf_iterator<char>(t)), {});
  const auto pair = align_document(src_doc, tgt_doc, {"zh", "en"}, config);
  EXPECT_EQ(pair.path.pairs, (std::vector<PathPoint>{{0, 0}, {1, 1}, {3, 2}, {3, 3}, {5, 4}}));
  EXPECT_DOUBLE_EQ(pair.path.total, 5.0);
  ASSERT_EQ(pair.tgt_reconstructed.size(), 6u);
  std::vector<std::string> texts;
  for (const auto& e : pair.tgt_reconstructed) texts.push_back(e.text);
  EXPECT_EQ(texts, (std::vector<std::string>{
                       "This morning I went to the market.",
                       "I bought some apples, which were very fresh.",
                       "",
                       "On the way home it started to rain heavily. I had not brought an umbrella.",
                       "",
                       "In the evening I baked an apple pie."}));
  EXPECT_EQ(pair.placeholder_count, 2u);
  EXPECT_TRUE(pair.tgt_reconstructed[2].is_placeholder);
  EXPECT_EQ(pair.tgt_reconstructed[3].target_indices, (std::vector<std::size_t>{2, 3}));
}

TEST(DpSearch, OneByOne) {
  const auto m = SimilarityMatrix::from_rows({{0.37}});
  for (auto mode : {DpMode::strict, DpMode::relaxed}) {
    const auto p = dp_search(m, {mode, false});
    EXPECT_EQ(p.pairs, (std::vector<PathPoint>{{0, 0}}));
    EXPECT_EQ(p.total, 0.37);
  }
}

TEST(DpSearch, EmptyMatrixIsInvalid) {
  EXPECT_THROW(dp_search(SimilarityMatrix{}), InvalidInput);
  SimilarityMatrix bad;
  bad.m = 2;
  bad.n = 2;
  bad.values = {1.0};
  EXPECT_THROW(dp_search(bad), InvalidInput);
}

TEST(DpSearch, MatchesBruteForceOnRandomMatrices) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  for (int trial = 0; trial < 600; ++trial) {
    const std::size_t m = dim(rng), n = dim(rng);
    const bool integers = trial % 2 == 1;  // integer cells force many ties
    const auto matrix = random_matrix(rng, m, n, integers);
    for (auto mode : {DpMode::strict, DpMode::relaxed}) {
      for (bool forbid : {false, true}) {
        const SearchOptions options{mode, forbid};
        if (count_paths(m, n, options, 10'000'000) == 0) {
          EXPECT_THROW(dp_search(matrix, options), InvalidInput);
          continue;
        }
        const auto dp = dp_search(matrix, options);
        const auto bf = brute_force_search(matrix, options);
        ASSERT_EQ(dp.total, bf.total) << m << "x" << n << " trial " << trial;
        ASSERT_EQ(dp.pairs, bf.pairs) << m << "x" << n << " trial " << trial;
        EXPECT_NO_THROW(validate_path(dp, m, n, options));
      }
    }
  }
}

TEST(DpSearch, StrictAndRelaxedDifferOnCounterexample) {
  // Best match for target 0 is source 1.
  const auto m = SimilarityMatrix::from_rows({{0.1, 0.0}, {0.9, 0.1}, {0.0, 0.9}});
  const auto strict = dp_search(m, {DpMode::strict, false});
  const auto relaxed = dp_search(m, {DpMode::relaxed, false});
  EXPECT_EQ(sources(strict), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(sources(relaxed), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(strict, brute_force_search(m, {DpMode::strict, false}));
  EXPECT_EQ(relaxed, brute_force_search(m, {DpMode::relaxed, false}));
  EXPECT_DOUBLE_EQ(relaxed.total, 1.8);
}

TEST(DpSearch, DominantColumnPinsTarget) {
  auto m = SimilarityMatrix::from_rows({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  m.values[2 * 3 + 1] = 10.0;  // source 2, target 1
  EXPECT_EQ(dp_search(m).pairs[1].source, 2u);
}

TEST(DpSearch, SingleTargetIsUnpinnedInStrictMode) {
  const auto m = SimilarityMatrix::from_rows({{0.1}, {0.8}, {0.3}});
  const auto p = dp_search(m);
  EXPECT_EQ(sources(p), std::vector<std::size_t>{1});
  EXPECT_EQ(p, brute_force_search(m));
}

TEST(DpSearch, TiesPreferSmallestSource) {
  const auto m = SimilarityMatrix::from_rows({{1, 1}, {1, 1}, {1, 1}});
  EXPECT_EQ(sources(dp_search(m, {DpMode::relaxed, false})), (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(sources(dp_search(m, {DpMode::strict, false})), (std::vector<std::size_t>{0, 2}));
}

TEST(DpSearch, ConstantShiftKeepsPath) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto matrix = random_matrix(rng, 2 + trial % 6, 2 + trial % 5, false);
    const auto before = dp_search(matrix);
    for (auto& v : matrix.values) v += 0.5;
    const auto after = dp_search(matrix);
    EXPECT_EQ(before.pairs, after.pairs);
    EXPECT_NEAR(after.total, before.total + 0.5 * static_cast<double>(matrix.n), 1e-9);
  }
}

TEST(DpSearch, ForbidZeroStepAdvancesEverySentence) {
  const auto m = SimilarityMatrix::from_rows({{1, 0}, {0, 0}, {0, 1}});
  const auto p = dp_search(m, {DpMode::relaxed, true});
  EXPECT_LT(p.pairs[0].source, p.pairs[1].source);
  // More targets than sources cannot advance every step.
  const auto wide = SimilarityMatrix::from_rows({{1, 1, 1}, {1, 1, 1}});
  EXPECT_THROW(dp_search(wide, {DpMode::strict, true}), InvalidInput);
}

TEST(DpSearch, Deterministic) {
  std::mt19937 rng(11);
  const auto matrix = random_matrix(rng, 40, 35, true);
  EXPECT_EQ(dp_search(matrix), dp_search(matrix));
}

TEST(DpSearch, HandlesLargeMatrices) {
  std::mt19937 rng(5);
  const auto matrix = random_matrix(rng, 600, 600, false);
  const auto p = dp_search(matrix);
  EXPECT_NO_THROW(validate_path(p, 600, 600, {}));
}

TEST(CountPaths, ClosedForms) {
  for (std::uint64_t m = 1; m <= 8; ++m) {
    for (std::uint64_t n = 1; n <= 8; ++n) {
      // Relaxed: non-decreasing sequences of length n over m values.
      EXPECT_EQ(count_paths(m, n, {DpMode::relaxed, false}, 1'000'000), binom(m + n - 1, n));
      // Strict with n >= 2: the n-2 interior points are free.
      if (n >= 2) {
        EXPECT_EQ(count_paths(m, n, {DpMode::strict, false}, 1'000'000), binom(m + n - 3, n - 2));
      }
      // Strictly increasing sequences.
      EXPECT_EQ(count_paths(m, n, {DpMode::relaxed, true}, 1'000'000), binom(m, n));
    }
  }
  EXPECT_EQ(count_paths(60, 60, {DpMode::relaxed, false}, 1000), 1001u);
}

TEST(BruteForce, RefusesHugeInstances) {
  std::mt19937 rng(1);
  const auto matrix = random_matrix(rng, 20, 20, false);
  EXPECT_THROW(brute_force_search(matrix), OracleTooLarge);
}

TEST(ValidatePath, RejectsBadPaths) {
  const SearchOptions strict{};
  EXPECT_THROW(validate_path({{{0, 0}}, 0}, 2, 2, strict), InvalidInput);
  EXPECT_THROW(validate_path({{{1, 0}, {0, 1}}, 0}, 2, 2, strict), InvalidInput);
  EXPECT_THROW(validate_path({{{0, 0}, {0, 1}}, 0}, 2, 2, strict), InvalidInput);
  EXPECT_THROW(validate_path({{{0, 1}, {1, 0}}, 0}, 2, 2, strict), InvalidInput);
  EXPECT_THROW(validate_path({{{0, 0}, {3, 1}}, 0}, 2, 2, {DpMode::relaxed, false}), InvalidInput);
  EXPECT_NO_THROW(validate_path({{{0, 0}, {1, 1}}, 0}, 2, 2, strict));
}

TEST(Reconstruct, IdentityPathReturnsTargetVerbatim) {
  const auto src = sentences({"a", "b", "c"});
  const auto tgt = sentences({"x", "y", "z"});
  const auto pair = reconstruct(src, tgt, {{{0, 0}, {1, 1}, {2, 2}}, 0});
  EXPECT_EQ(pair.placeholder_count, 0u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(pair.tgt_reconstructed[i].text, tgt[i]);
    EXPECT_EQ(pair.tgt_reconstructed[i].target_indices, std::vector<std::size_t>{i});
  }
}

TEST(Reconstruct, EverythingOnFirstSource) {
  const auto matrix = SimilarityMatrix::from_rows({{5, 5, 5}, {0, 0, 0}, {0, 0, 0}});
  const auto path = dp_search(matrix, {DpMode::relaxed, false});
  const auto pair = reconstruct(sentences({"a", "b", "c"}), sentences({"x.", "y.", "z."}), path,
                                {"<gap>", JoinerPolicy::automatic});
  EXPECT_EQ(pair.tgt_reconstructed[0].text, "x. y. z.");
  EXPECT_EQ(pair.tgt_reconstructed[0].target_indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(pair.tgt_reconstructed[1].text, "<gap>");
  EXPECT_TRUE(pair.tgt_reconstructed[2].is_placeholder);
  EXPECT_EQ(pair.placeholder_count, 2u);
}

TEST(Reconstruct, JoinerFollowsTargetLanguage) {
  const auto pair = reconstruct(sentences({"a"}), sentences({"你好。", "再见。"}, "zh"),
                                {{{0, 0}, {0, 1}}, 0});
  EXPECT_EQ(pair.tgt_reconstructed[0].text, "你好。再见。");
  EXPECT_EQ(joiner_for(JoinerPolicy::automatic, "ja-JP"), "");
  EXPECT_EQ(joiner_for(JoinerPolicy::automatic, "de"), " ");
  EXPECT_EQ(joiner_for(JoinerPolicy::space, "zh"), " ");
  EXPECT_EQ(joiner_for(JoinerPolicy::none, "en"), "");
  EXPECT_THROW(parse_joiner_policy("tab"), InvalidInput);
  EXPECT_THROW(parse_dp_mode("loose"), InvalidInput);
}

TEST(Reconstruct, RejectsMismatchedPath) {
  EXPECT_THROW(reconstruct(sentences({"a"}), sentences({"x", "y"}), {{{0, 0}}, 0}), InvalidInput);
  EXPECT_THROW(reconstruct(sentences({"a"}), sentences({"x"}), {{{1, 0}}, 0}), InvalidInput);
}

TEST(Reconstruct, PartitionInvariantOnRandomPaths) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng() % 8, n = 1 + rng() % 8;
    const auto matrix = random_matrix(rng, m, n, true);
    const auto path = dp_search(matrix, {DpMode::relaxed, false});
    std::vector<std::string> t;
    for (std::size_t j = 0; j < n; ++j) t.push_back("t" + std::to_string(j));
    const auto pair = reconstruct(sentences(std::vector<std::string>(m, "s")), sentences(t), path);
    ASSERT_EQ(pair.tgt_reconstructed.size(), m);
    std::vector<std::size_t> seen;
    for (const auto& e : pair.tgt_reconstructed) {
      EXPECT_EQ(e.is_placeholder, e.target_indices.empty());
      if (e.is_placeholder) {
        EXPECT_EQ(e.text, "");
      }
      for (std::size_t i = 1; i < e.target_indices.size(); ++i) {
        EXPECT_EQ(e.target_indices[i], e.target_indices[i - 1] + 1);
      }
      seen.insert(seen.end(), e.target_indices.begin(), e.target_indices.end());
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(seen, all);
  }
}

TEST(AlignDocument, SelfAlignmentIsIdentity) {
  testkit::SyntheticDocs gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = gen.sentences(3 + trial % 9);
    const auto doc = testkit::SyntheticDocs::join(s);
    const auto pair = align_document(doc, doc, {"en", "en"}, lexical_config());
    ASSERT_EQ(pair.m(), s.size());
    EXPECT_EQ(pair.placeholder_count, 0u);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(pair.tgt_reconstructed[i].text, s[i]);
  }
}

TEST(AlignDocument, DeletingOneTargetSentenceLeavesOnePlaceholder) {
  testkit::SyntheticDocs gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = gen.sentences(4 + trial % 8);
    const auto src = testkit::SyntheticDocs::join(s);
    const std::size_t drop = trial % 2 == 0 ? s.size() - 1 : 1 + trial % (s.size() - 2);
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(drop));
    auto config = lexical_config();
    if (drop == s.size()) config.search.mode = DpMode::relaxed;  // final sentence missing
    const auto pair = align_document(src, testkit::SyntheticDocs::join(s), {"en", "en"}, config);
    EXPECT_EQ(pair.placeholder_count, 1u) << "drop " << drop;
    EXPECT_TRUE(pair.tgt_reconstructed[drop].is_placeholder) << "drop " << drop;
  }
}

TEST(AlignDocument, EmptyTargetIsAllPlaceholders) {
  AlignConfig config = lexical_config();
  config.reconstruct.placeholder = "-";
  const auto pair = align_document("One. Two. Three.", "  \n ", {"en", "en"}, config);
  EXPECT_EQ(pair.placeholder_count, 3u);
  for (const auto& e : pair.tgt_reconstructed) EXPECT_EQ(e.text, "-");
  EXPECT_TRUE(pair.path.pairs.empty());
}

TEST(AlignDocument, ReferenceIsAlignedWhenRequested) {
  auto config = lexical_config();
  config.align_reference = true;
  const auto pair = align_document("Alpha one. Beta two. Gamma three.", "Alpha one. Gamma three.",
                                   {"en", "en"}, config, std::string_view("Alpha one. Beta two. Gamma three."));
  ASSERT_TRUE(pair.ref_reconstructed.has_value());
  EXPECT_EQ((*pair.ref_reconstructed)[1].text, "Beta two.");
  EXPECT_EQ(pair.tgt_reconstructed[1].text, "");
  config.align_reference = false;
  EXPECT_FALSE(align_document("A b.", "A b.", {"en", "en"}, config, std::string_view("A b.")).ref_reconstructed);
}

TEST(AlignDocument, RejectsReferenceBasedAlignmentMetric) {
  AlignConfig config;
  config.align_scorer = std::make_shared<testkit::ConstantScorer>(1.0, true);
  EXPECT_THROW(align_document("A.", "B.", {"en", "en"}, config), MetricContractError);
  config.align_scorer = nullptr;
  EXPECT_THROW(align_document("A.", "B.", {"en", "en"}, config), InvalidInput);
}
