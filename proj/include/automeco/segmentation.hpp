#pragma once

// Step boundary detection on transitional markers `Step <n>:` and `Answer:`
// (case-sensitive), plus alignment of character segments to token ranges.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "automeco/errors.hpp"
#include "automeco/text.hpp"
#include "automeco/trace.hpp"

namespace automeco {

struct Segment {
  SegmentLabel label;
  std::size_t char_start = 0;  // code points, half-open
  std::size_t char_end = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

namespace detail {

struct MarkerMatch {
  std::size_t byte_pos;
  std::size_t byte_len;
  SegmentLabel label;
};

// Tries to match a marker starting exactly at byte `pos`.
inline std::optional<MarkerMatch> match_marker_at(std::string_view s, std::size_t pos) {
  constexpr std::string_view answer = "Answer:";
  constexpr std::string_view step = "Step ";
  if (s.compare(pos, answer.size(), answer) == 0) return MarkerMatch{pos, answer.size(), SegmentLabel::answer()};
  if (s.compare(pos, step.size(), step) != 0) return std::nullopt;

  std::size_t i = pos + step.size();
  std::uint64_t k = 0;
  bool overflow = false;
  const std::size_t digits_begin = i;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
    const auto digit = static_cast<std::uint64_t>(s[i] - '0');
    if (k > (UINT64_MAX - digit) / 10) overflow = true;
    k = k * 10 + digit;
    ++i;
  }
  if (i == digits_begin || i >= s.size() || s[i] != ':' || overflow) return std::nullopt;
  return MarkerMatch{pos, i + 1 - pos, SegmentLabel::step(k)};
}

inline std::vector<MarkerMatch> find_markers(std::string_view s) {
  std::vector<MarkerMatch> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const char c = s[pos];
    if (c == 'S' || c == 'A') {
      if (auto m = match_marker_at(s, pos)) {
        out.push_back(*m);
        pos += m->byte_len;
        continue;
      }
    }
    ++pos;
  }
  return out;
}

}  // namespace detail

// Splits a response into labeled segments. Each segment runs from its marker
// to the next marker (or end of text); text before the first marker is
// dropped. Without any marker the whole text is one Step 1 segment.
inline std::vector<Segment> segment_text(std::string_view response_text) {
  const auto markers = detail::find_markers(response_text);
  const auto cp_of = text::byte_to_codepoint_index(response_text);
  const std::size_t total = cp_of.back();

  std::vector<Segment> out;
  if (markers.empty()) {
    if (total > 0) out.push_back({SegmentLabel::step(1), 0, total});
    return out;
  }
  out.reserve(markers.size());
  for (std::size_t i = 0; i < markers.size(); ++i) {
    const std::size_t begin = cp_of[markers[i].byte_pos];
    const std::size_t end = (i + 1 < markers.size()) ? cp_of[markers[i + 1].byte_pos] : total;
    out.push_back({markers[i].label, begin, end});
  }
  return out;
}

// Assigns every token to the segment containing its char_start. Tokens outside
// all segments are dropped. Throws DegenerateError for a segment with no token.
inline std::vector<StepSpan> align_tokens(std::span<const Segment> segments, std::span<const TokenScalars> tokens) {
  std::vector<StepSpan> out;
  out.reserve(segments.size());
  std::size_t t = 0;
  for (const auto& seg : segments) {
    while (t < tokens.size() && tokens[t].char_start < seg.char_start) ++t;
    const std::size_t first = t;
    while (t < tokens.size() && tokens[t].char_start < seg.char_end) ++t;
    if (t == first) {
      throw DegenerateError("segment '" + seg.label.to_string() + "' [" + std::to_string(seg.char_start) + ", " +
                            std::to_string(seg.char_end) + ") captures no tokens");
    }
    out.push_back({seg.label, seg.char_start, seg.char_end, first, t});
  }
  return out;
}

}  // namespace automeco
