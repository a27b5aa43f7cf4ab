#include "docasd/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include <unicode/uchar.h>

#include "docasd/error.hpp"
#include "docasd/subprocess.hpp"
#include "docasd/unicode.hpp"

namespace docasd {

namespace {

enum class RuleSet { latin, cjk };

constexpr std::array<std::string_view, 40> kAbbreviations = {
    "mr",   "mrs",  "ms",   "dr",   "prof", "sr",   "jr",  "st",   "vs",  "e.g",
    "i.e",  "cf",   "fig",  "no",   "vol",  "pp",   "approx", "dept", "inc", "ltd",
    "co",   "corp", "jan",  "feb",  "mar",  "apr",  "jun", "jul",  "aug", "sep",
    "sept", "oct",  "nov",  "dec",  "gen",  "gov",  "u.s", "a.m",  "p.m", "mt"};

bool is_latin_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_cjk_terminator(char32_t c) {
  switch (c) {
    case U'。':
    case U'！':
    case U'？':
    case U'．':
    case U'｡':
    case U'‼':
    case U'⁇':
    case U'⁈':
    case U'⁉':
      return true;
    default:
      return false;
  }
}

bool is_closer(char32_t c) {
  switch (c) {
    case U'"':
    case U'\'':
    case U')':
    case U']':
    case U'}':
    case U'»':
    case U'”':
    case U'’':
    case U'」':
    case U'』':
    case U'）':
    case U'》':
    case U'】':
    case U'〕':
    case U'〉':
    case U'＂':
    case U'＇':
      return true;
    default:
      return false;
  }
}

bool is_ascii_alnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

bool is_lowercase_letter(char32_t c) { return u_islower(static_cast<UChar32>(c)); }

bool is_cjk_ideograph(char32_t c) {
  return (c >= 0x3040 && c <= 0x30FF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0xF900 && c <= 0xFAFF) ||
         (c >= 0xAC00 && c <= 0xD7AF) || (c >= 0x20000 && c <= 0x2FA1F);
}

RuleSet parse_rule_set(std::string_view name) {
  if (name == "cjk") return RuleSet::cjk;
  if (name == "latin") return RuleSet::latin;
  throw InvalidInput("unknown segmentation rule set '" + std::string(name) + "'");
}

std::string primary_subtag(std::string_view language) {
  std::string out;
  for (char c : language) {
    if (c == '-' || c == '_') break;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

class RuleSegmenter {
 public:
  RuleSegmenter(std::string_view text, RuleSet rules)
      : text_(text), cps_(unicode::decode(text)), rules_(rules) {}

  // Byte offsets at which sentences end (exclusive), in order.
  std::vector<std::size_t> boundaries() const {
    std::vector<std::size_t> out;
    std::size_t i = 0;
    while (i < cps_.size()) {
      const char32_t c = cps_[i].value;
      if (c == U'\n' && paragraph_break_at(i)) {
        out.push_back(cps_[i].offset);
        ++i;
        continue;
      }
      if (!is_latin_terminator(c) && !is_cjk_terminator(c) && c != U'…') {
        ++i;
        continue;
      }
      std::size_t run_end = i;
      bool has_cjk = false;
      bool only_period = true;
      while (run_end < cps_.size() && (is_latin_terminator(cps_[run_end].value) ||
                                       is_cjk_terminator(cps_[run_end].value) ||
                                       cps_[run_end].value == U'…')) {
        const char32_t t = cps_[run_end].value;
        has_cjk = has_cjk || is_cjk_terminator(t) || (rules_ == RuleSet::cjk && t == U'…');
        only_period = only_period && t == U'.';
        ++run_end;
      }
      only_period = only_period && run_end == i + 1;
      std::size_t close_end = run_end;
      while (close_end < cps_.size() && is_closer(cps_[close_end].value)) ++close_end;

      if (breaks_after(i, close_end, has_cjk, only_period)) {
        out.push_back(close_end < cps_.size() ? cps_[close_end].offset : text_.size());
      }
      i = close_end;
    }
    return out;
  }

 private:
  bool paragraph_break_at(std::size_t i) const {
    for (std::size_t j = i + 1; j < cps_.size(); ++j) {
      if (cps_[j].value == U'\n') return true;
      if (!unicode::is_space(cps_[j].value)) return false;
    }
    return false;
  }

  std::size_t next_non_space(std::size_t from) const {
    while (from < cps_.size() && unicode::is_space(cps_[from].value)) ++from;
    return from;
  }

  bool breaks_after(std::size_t run_begin, std::size_t close_end,
                    bool has_cjk, bool only_period) const {
    if (close_end >= cps_.size()) return true;
    const char32_t next = cps_[close_end].value;
    if (has_cjk) return true;

    const bool followed_by_space = unicode::is_space(next);
    if (rules_ == RuleSet::cjk) {
      if (!followed_by_space) {
        // "3.14", "example.com" stay intact; 你好!今天 splits.
        if (only_period) return is_cjk_ideograph(next);
        return !is_ascii_alnum(next);
      }
    } else if (!followed_by_space) {
      return false;
    }

    if (only_period) {
      if (guarded_abbreviation(run_begin)) return false;
      const std::size_t after = next_non_space(close_end);
      if (after < cps_.size() && is_lowercase_letter(cps_[after].value)) return false;
    }
    return true;
  }

  // The word right before the period at `dot` is a known abbreviation or a
  // single-letter initial.
  bool guarded_abbreviation(std::size_t dot) const {
    std::size_t start = dot;
    while (start > 0 && !unicode::is_space(cps_[start - 1].value) &&
           !is_closer(cps_[start - 1].value) && cps_[start - 1].value != U'(' &&
           cps_[start - 1].value != U'"') {
      --start;
    }
    if (start == dot) return false;
    const std::size_t b = cps_[start].offset;
    const std::string word = unicode::lower(text_.substr(b, cps_[dot].offset - b));
    if (dot - start == 1 && u_isupper(static_cast<UChar32>(cps_[start].value))) return true;
    return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) !=
           kAbbreviations.end();
  }

  std::string_view text_;
  std::vector<unicode::CodePoint> cps_;
  RuleSet rules_;
};

SentenceList from_boundaries(std::string normalized, const std::vector<std::size_t>& ends,
                             std::string language, std::string doc_id) {
  SentenceList out;
  out.doc_id = std::move(doc_id);
  out.language = std::move(language);
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    const auto [b, e] = unicode::trimmed_range(normalized, start, end);
    if (e > b) {
      out.sentences.emplace_back(normalized.substr(b, e - b));
      out.spans.push_back({b, e});
    }
    start = end;
  };
  for (std::size_t end : ends) emit(end);
  emit(normalized.size());
  out.text = std::move(normalized);
  return out;
}

std::string normalized_nonempty(std::string_view document) {
  std::string normalized = unicode::nfc(document);
  if (unicode::trim(normalized).empty()) throw EmptyDocument();
  return normalized;
}

}  // namespace

void validate(const SentenceList& list) {
  if (list.sentences.size() != list.spans.size()) {
    throw InvalidInput("sentence/span count mismatch");
  }
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < list.spans.size(); ++i) {
    const Span& s = list.spans[i];
    if (s.begin >= s.end || s.end > list.text.size() || (i > 0 && s.begin < prev_end)) {
      throw InvalidInput("span " + std::to_string(i) + " out of order or out of range");
    }
    const std::string_view piece(list.text.data() + s.begin, s.end - s.begin);
    if (unicode::trim(piece) != list.sentences[i]) {
      throw InvalidInput("span " + std::to_string(i) + " does not match its sentence");
    }
    if (unicode::trim(list.sentences[i]).empty()) {
      throw InvalidInput("sentence " + std::to_string(i) + " is empty");
    }
    prev_end = s.end;
  }
}

std::string default_rule_set(std::string_view language) {
  const std::string primary = primary_subtag(language);
  if (primary == "zh" || primary == "ja" || primary == "yue" || primary == "wuu" ||
      primary == "cmn") {
    return "cjk";
  }
  return "latin";
}

SentenceList segment(std::string_view document, std::string_view language,
                     const SegmenterConfig& config, std::string doc_id) {
  if (config.backend == SegmenterBackend::external) {
    if (!config.external_command) {
      throw InvalidInput("external segmenter backend requires a command template");
    }
    return segment_via_external(document, language, *config.external_command,
                                config.external_timeout, std::move(doc_id));
  }
  std::string normalized = normalized_nonempty(document);

  std::string rule_name;
  if (auto it = config.language_overrides.find(std::string(language));
      it != config.language_overrides.end()) {
    rule_name = it->second;
  } else if (auto it2 = config.language_overrides.find(primary_subtag(language));
             it2 != config.language_overrides.end()) {
    rule_name = it2->second;
  } else {
    rule_name = default_rule_set(language);
  }
  const RuleSegmenter segmenter(normalized, parse_rule_set(rule_name));
  const auto ends = segmenter.boundaries();
  return from_boundaries(std::move(normalized), ends, std::string(language), std::move(doc_id));
}

std::vector<Span> recover_spans(std::string_view text, const std::vector<std::string>& lines) {
  std::vector<Span> spans;
  spans.reserve(lines.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t pos = text.find(lines[i], cursor);
    if (pos == std::string_view::npos) {
      throw SegmenterBackendError("segmenter line " + std::to_string(i + 1) +
                                      " not found in document after offset " +
                                      std::to_string(cursor),
                                  lines[i]);
    }
    spans.push_back({pos, pos + lines[i].size()});
    cursor = pos + lines[i].size();
  }
  return spans;
}

SentenceList segment_via_external(std::string_view document, std::string_view language,
                                  const std::string& command, std::chrono::milliseconds timeout,
                                  std::string doc_id) {
  std::string normalized = normalized_nonempty(document);

  std::string resolved = command;
  for (std::size_t pos; (pos = resolved.find("{lang}")) != std::string::npos;) {
    resolved.replace(pos, 6, language);
  }
  const ProcessResult run = run_shell(resolved, normalized, timeout);
  if (run.timed_out) {
    throw SegmenterBackendError("external segmenter timed out after " +
                                    std::to_string(timeout.count()) + " ms",
                                run.err);
  }
  if (run.exit_code != 0) {
    throw SegmenterBackendError(
        "external segmenter exited with status " + std::to_string(run.exit_code), run.err);
  }

  std::vector<std::string> lines;
  std::istringstream stream(run.out);
  for (std::string line; std::getline(stream, line);) {
    std::string cleaned(unicode::trim(unicode::nfc(line)));
    if (!cleaned.empty()) lines.push_back(std::move(cleaned));
  }
  if (lines.empty()) {
    throw SegmenterBackendError("external segmenter produced no sentences", run.err);
  }

  SentenceList out;
  out.doc_id = std::move(doc_id);
  out.language = std::string(language);
  out.spans = recover_spans(normalized, lines);
  out.sentences = std::move(lines);
  out.text = std::move(normalized);
  return out;
}

}  // namespace docasd
