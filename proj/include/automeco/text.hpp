#pragma once

// UTF-8 helpers. Character offsets throughout the library count Unicode code
// points, which is what Python string indices (and tokenizer offset maps)
// report, so the segmenter and the extractor agree on every span.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace automeco::text {

inline bool is_continuation_byte(unsigned char c) { return (c & 0xC0U) == 0x80U; }

inline std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if (!is_continuation_byte(static_cast<unsigned char>(c))) ++n;
  }
  return n;
}

// byte_to_cp[b] is the code point index of byte b; the vector has one extra
// entry for the end position. Continuation bytes map to their lead code point.
inline std::vector<std::size_t> byte_to_codepoint_index(std::string_view s) {
  std::vector<std::size_t> out(s.size() + 1);
  std::size_t seen = 0;  // lead bytes consumed so far
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (!is_continuation_byte(static_cast<unsigned char>(s[b]))) ++seen;
    out[b] = seen == 0 ? 0 : seen - 1;
  }
  out[s.size()] = seen;
  return out;
}

// Byte offset of each code point plus a trailing entry for the end.
inline std::vector<std::size_t> codepoint_byte_offsets(std::string_view s) {
  std::vector<std::size_t> out;
  out.reserve(s.size() + 1);
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (!is_continuation_byte(static_cast<unsigned char>(s[b]))) out.push_back(b);
  }
  out.push_back(s.size());
  return out;
}

// Substring by code point range [cp_begin, cp_end).
inline std::string slice_codepoints(std::string_view s, std::size_t cp_begin, std::size_t cp_end) {
  const auto offsets = codepoint_byte_offsets(s);
  const std::size_t n = offsets.size() - 1;
  if (cp_begin > n) cp_begin = n;
  if (cp_end > n) cp_end = n;
  if (cp_end < cp_begin) cp_end = cp_begin;
  return std::string(s.substr(offsets[cp_begin], offsets[cp_end] - offsets[cp_begin]));
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace automeco::text
