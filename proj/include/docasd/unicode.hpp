#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace docasd::unicode {

// Canonical composition (NFC). Invalid UTF-8 sequences become U+FFFD.
std::string nfc(std::string_view text);

// Full Unicode lowercasing with the root locale, result re-normalized to NFC.
std::string lower(std::string_view text);

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset of the first code unit
  std::size_t length;  // bytes
};

std::vector<CodePoint> decode(std::string_view text);

bool is_space(char32_t cp);

// Strip leading/trailing Unicode whitespace.
std::string_view trim(std::string_view text);

// Byte range [begin, end) of `text` with surrounding whitespace removed.
std::pair<std::size_t, std::size_t> trimmed_range(std::string_view text,
                                                  std::size_t begin,
                                                  std::size_t end);

}  // namespace docasd::unicode
