#include "docasd/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "docasd/error.hpp"

namespace docasd::unicode {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || norm == nullptr) {
    throw Error(std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  }
  return *norm;
}

std::string normalize(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc_instance().normalize(in, status);
  if (U_FAILURE(status)) {
    throw Error(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  std::string bytes;
  out.toUTF8String(bytes);
  return bytes;
}

}  // namespace

std::string nfc(std::string_view text) {
  return normalize(icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))));
}

std::string lower(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s.toLower(icu::Locale::getRoot());
  return normalize(s);
}

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(start),
                   static_cast<std::size_t>(i - start)});
  }
  return out;
}

bool is_space(char32_t cp) {
  return u_isUWhiteSpace(static_cast<UChar32>(cp)) || cp == 0x200B || cp == 0xFEFF;
}

std::pair<std::size_t, std::size_t> trimmed_range(std::string_view text, std::size_t begin,
                                                  std::size_t end) {
  const auto cps = decode(text.substr(begin, end - begin));
  std::size_t first = 0;
  while (first < cps.size() && is_space(cps[first].value)) ++first;
  if (first == cps.size()) return {begin, begin};
  std::size_t last = cps.size();
  while (last > first && is_space(cps[last - 1].value)) --last;
  return {begin + cps[first].offset, begin + cps[last - 1].offset + cps[last - 1].length};
}

std::string_view trim(std::string_view text) {
  const auto [b, e] = trimmed_range(text, 0, text.size());
  return text.substr(b, e - b);
}

}  // namespace docasd::unicode
