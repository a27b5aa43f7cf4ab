#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "docasd/error.hpp"
#include "docasd/segmentation.hpp"
#include "docasd/unicode.hpp"
#include "test_support.hpp"

using namespace docasd;

namespace {

std::vector<std::string> sentences_of(std::string_view doc, std::string_view lang,
                                      const SegmenterConfig& cfg = {}) {
  const SentenceList list = segment(doc, lang, cfg);
  validate(list);
  return list.sentences;
}

using Lines = std::vector<std::string>;

}  // namespace

TEST(Segmentation, EnglishTwoSentences) {
  EXPECT_EQ(sentences_of("Hello world. How are you?", "en"), (Lines{"Hello world.", "How are you?"}));
}

TEST(Segmentation, ChineseFullStops) {
  EXPECT_EQ(sentences_of("你好。今天天气好！", "zh"), (Lines{"你好。", "今天天气好！"}));
}

TEST(Segmentation, WorkedExampleSourceHasSixSentences) {
  std::ifstream in(testkit::fixture("worked_example/source.txt"));
  std::string doc((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const SentenceList list = segment(doc, "zh");
  validate(list);
  EXPECT_EQ(list.size(), 6u);
  EXPECT_EQ(list[3], "回家的路上下起了大雨，我没有带伞。");
}

TEST(Segmentation, AbbreviationsAndInitialsDoNotSplit) {
  EXPECT_EQ(sentences_of("Dr. Smith met J. Doe at 5 p.m. yesterday. They talked.", "en"),
            (Lines{"Dr. Smith met J. Doe at 5 p.m. yesterday.", "They talked."}));
  EXPECT_EQ(sentences_of("Pi is 3.14 roughly. See e.g. the appendix.", "en"),
            (Lines{"Pi is 3.14 roughly.", "See e.g. the appendix."}));
}

TEST(Segmentation, ClosingQuotesStayWithTheirSentence) {
  EXPECT_EQ(sentences_of("He said \"Stop.\" Then he left!", "en"),
            (Lines{"He said \"Stop.\"", "Then he left!"}));
  EXPECT_EQ(sentences_of("他说：“走吧。”我们就走了。", "zh"), (Lines{"他说：“走吧。”", "我们就走了。"}));
}

TEST(Segmentation, TerminatorRunsAndEllipsis) {
  EXPECT_EQ(sentences_of("Really?! Yes... Fine.", "en"), (Lines{"Really?!", "Yes...", "Fine."}));
  EXPECT_EQ(sentences_of("真的吗？！是的……好吧。", "zh"), (Lines{"真的吗？！", "是的……", "好吧。"}));
}

TEST(Segmentation, CjkRulesSplitAsciiBangWithoutSpace) {
  EXPECT_EQ(sentences_of("你好!今天见。版本3.14不变。", "zh"), (Lines{"你好!", "今天见。", "版本3.14不变。"}));
  // Latin rules need whitespace after ASCII punctuation.
  EXPECT_EQ(sentences_of("Hi!there", "en"), (Lines{"Hi!there"}));
}

TEST(Segmentation, ParagraphBreakIsABoundary) {
  EXPECT_EQ(sentences_of("Chapter One\n\nIt was late. We slept.", "en"),
            (Lines{"Chapter One", "It was late.", "We slept."}));
  EXPECT_EQ(sentences_of("line one\nline two.", "en"), (Lines{"line one\nline two."}));
}

TEST(Segmentation, LanguageOverrideSelectsRuleSet) {
  SegmenterConfig cfg;
  cfg.language_overrides["xx"] = "cjk";
  EXPECT_EQ(sentences_of("好!好", "xx", cfg), (Lines{"好!", "好"}));
  EXPECT_EQ(sentences_of("好!好", "xx"), (Lines{"好!好"}));
  cfg.language_overrides["xx"] = "nonsense";
  EXPECT_THROW(segment("A!B", "xx", cfg), InvalidInput);
  EXPECT_EQ(default_rule_set("zh-Hant-TW"), "cjk");
  EXPECT_EQ(default_rule_set("ja"), "cjk");
  EXPECT_EQ(default_rule_set("de"), "latin");
  EXPECT_EQ(default_rule_set("unknown"), "latin");
}

TEST(Segmentation, EmptyDocumentIsRejected) {
  EXPECT_THROW(segment("", "en"), EmptyDocument);
  EXPECT_THROW(segment(" \n\t　", "zh"), EmptyDocument);
}

TEST(Segmentation, WhitespaceOnlyPiecesAreDropped) {
  EXPECT_EQ(sentences_of("One.   \n\n \n  Two.  ", "en"), (Lines{"One.", "Two."}));
}

TEST(Segmentation, NfcNormalizationBeforeMatching) {
  // "e" + combining acute composes to U+00E9; spans index the composed text.
  const SentenceList list = segment("Café ouvert. Merci.", "fr");
  validate(list);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0], "Café ouvert.");
  EXPECT_EQ(list.text.substr(list.spans[0].begin, list.spans[0].end - list.spans[0].begin), list[0]);
}

TEST(Segmentation, SingleSentenceIsIdempotent) {
  const auto first = sentences_of("Only one sentence here.", "en");
  ASSERT_EQ(first.size(), 1u);
  EXPECT_EQ(sentences_of(first[0], "en"), first);
}

TEST(Segmentation, PropertiesOnRandomDocuments) {
  std::mt19937 rng(7);
  const std::vector<std::string> pieces = {"Alpha beta.", "Gamma?", "Delta!", "  ", "\n\n", "你好。",
                                           "Mr. Brown left.", "x", "\"Quoted.\"", "e.g. this", " "};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    std::string doc = "Start.";
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) doc += " " + pieces[pick(rng)];
    for (const char* lang : {"en", "zh"}) {
      const SentenceList a = segment(doc, lang);
      validate(a);
      EXPECT_EQ(a, segment(doc, lang));  // deterministic

      // Concatenating the spans reproduces the text minus inter-sentence whitespace.
      std::string joined, stripped;
      for (const auto& s : a.sentences) joined += s;
      std::size_t cursor = 0;
      for (const auto& sp : a.spans) {
        EXPECT_TRUE(unicode::trim(a.text.substr(cursor, sp.begin - cursor)).empty());
        stripped += a.text.substr(sp.begin, sp.end - sp.begin);
        cursor = sp.end;
      }
      EXPECT_TRUE(unicode::trim(a.text.substr(cursor)).empty());
      EXPECT_EQ(joined, stripped);
    }
  }
}

TEST(Segmentation, ValidateCatchesBrokenLists) {
  SentenceList list = segment("One. Two.", "en");
  SentenceList bad = list;
  bad.sentences[1] = "Three.";
  EXPECT_THROW(validate(bad), InvalidInput);
  bad = list;
  std::swap(bad.spans[0], bad.spans[1]);
  std::swap(bad.sentences[0], bad.sentences[1]);
  EXPECT_THROW(validate(bad), InvalidInput);
  bad = list;
  bad.spans.pop_back();
  EXPECT_THROW(validate(bad), InvalidInput);
}

TEST(ExternalSegmenter, MatchesBuiltinWhenItEmitsTheSameLines) {
  const std::string doc = "Hello world. How are you? Fine thanks.";
  const SentenceList builtin = segment(doc, "en");
  const SentenceList external = segment_via_external(doc, "en", "sed 's/\\([.?!]\\) /\\1\\n/g'");
  EXPECT_EQ(external, builtin);

  SegmenterConfig cfg;
  cfg.backend = SegmenterBackend::external;
  cfg.external_command = "sed 's/\\([.?!]\\) /\\1\\n/g'";
  EXPECT_EQ(segment(doc, "en", cfg), builtin);
}

TEST(ExternalSegmenter, LanguagePlaceholderIsExpanded) {
  const SentenceList list = segment_via_external("abc def", "de", "echo {lang}; cat >/dev/null");
  EXPECT_THROW(segment_via_external("abc def", "zz", "echo {lang}-missing; cat >/dev/null"),
               SegmenterBackendError);
  EXPECT_EQ(list.sentences, (Lines{"de"}));
}

TEST(ExternalSegmenter, UnknownLineIsABackendError) {
  try {
    segment_via_external("Hello world.", "en", "cat >/dev/null; echo 'Not in the document.'");
    FAIL() << "expected SegmenterBackendError";
  } catch (const SegmenterBackendError& e) {
    EXPECT_EQ(e.diagnostics(), "Not in the document.");
  }
}

TEST(ExternalSegmenter, FailuresCarryDiagnostics) {
  try {
    segment_via_external("Hello.", "en", "echo broken >&2; exit 4");
    FAIL() << "expected SegmenterBackendError";
  } catch (const SegmenterBackendError& e) {
    EXPECT_NE(std::string(e.what()).find("status 4"), std::string::npos);
    EXPECT_EQ(e.diagnostics(), "broken\n");
  }
  EXPECT_THROW(segment_via_external("Hello.", "en", "sleep 5", std::chrono::milliseconds(200)),
               SegmenterBackendError);
  EXPECT_THROW(segment_via_external("Hello.", "en", "cat >/dev/null"), SegmenterBackendError);
  SegmenterConfig cfg;
  cfg.backend = SegmenterBackend::external;
  EXPECT_THROW(segment("Hello.", "en", cfg), InvalidInput);
}

TEST(ExternalSegmenter, LargeInputDoesNotDeadlock) {
  testkit::SyntheticDocs gen(3);
  const std::string doc = testkit::SyntheticDocs::join(gen.sentences(4000));
  const SentenceList list = segment_via_external(doc, "en", "sed 's/\\([.?!]\\) /\\1\\n/g'");
  EXPECT_EQ(list.size(), 4000u);
}
