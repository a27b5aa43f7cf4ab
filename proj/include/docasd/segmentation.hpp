#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace docasd {

// Byte offsets [begin, end) into SentenceList::text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

// A segmented document. `text` is the NFC-normalized document the spans
// point into.
struct SentenceList {
  std::string doc_id;
  std::string language;
  std::string text;
  std::vector<std::string> sentences;
  std::vector<Span> spans;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  const std::string& operator[](std::size_t i) const { return sentences[i]; }

  bool operator==(const SentenceList&) const = default;
};

// Throws InvalidInput naming the first violated invariant.
void validate(const SentenceList& list);

enum class SegmenterBackend { builtin_rules, external };

struct SegmenterConfig {
  SegmenterBackend backend = SegmenterBackend::builtin_rules;
  // Shell command; "{lang}" is replaced with the language code.
  std::optional<std::string> external_command;
  std::chrono::milliseconds external_timeout{30000};
  // language code -> rule set name ("latin" or "cjk")
  std::map<std::string, std::string> language_overrides;
};

// Rule set chosen for a language absent any override: "cjk" for zh/ja
// (with region/script subtags), "latin" otherwise.
std::string default_rule_set(std::string_view language);

SentenceList segment(std::string_view document, std::string_view language,
                     const SegmenterConfig& config = {}, std::string doc_id = {});

SentenceList segment_via_external(std::string_view document, std::string_view language,
                                  const std::string& command,
                                  std::chrono::milliseconds timeout = std::chrono::seconds(30),
                                  std::string doc_id = {});

// Spans of `lines` located greedily left to right in `text`. Throws
// SegmenterBackendError for a line that cannot be found.
std::vector<Span> recover_spans(std::string_view text, const std::vector<std::string>& lines);

}  // namespace docasd
