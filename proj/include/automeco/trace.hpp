#pragma once

// In-memory trace model: one question/response pair with the sufficient
// statistics every lens needs. Full probability vectors and per-token hidden
// states are summarized at extraction time; a trace only carries per-token
// (top1_prob, entropy) scalars and per-step mean-pooled hidden vectors.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "automeco/errors.hpp"
#include "automeco/text.hpp"

namespace automeco {

inline constexpr const char* kTraceSchema = "automeco-trace/1";

struct TokenScalars {
  std::string text;
  std::size_t char_start = 0;  // code points into response_text, half-open
  std::size_t char_end = 0;
  double top1_prob = 1.0;      // (0, 1]
  double entropy = 0.0;        // nats, full-vocabulary Shannon entropy

  friend bool operator==(const TokenScalars&, const TokenScalars&) = default;
};

// Label of a segment: `Step <k>` or `Answer`.
struct SegmentLabel {
  enum class Kind { Step, Answer };

  Kind kind = Kind::Step;
  std::uint64_t number = 1;  // meaningful for Kind::Step only

  static SegmentLabel step(std::uint64_t k) { return {Kind::Step, k}; }
  static SegmentLabel answer() { return {Kind::Answer, 0}; }

  bool is_answer() const { return kind == Kind::Answer; }

  std::string to_string() const {
    return is_answer() ? std::string("Answer") : "Step " + std::to_string(number);
  }

  static SegmentLabel parse(const std::string& s) {
    if (s == "Answer") return answer();
    constexpr std::string_view prefix = "Step ";
    if (s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0) {
      std::uint64_t k = 0;
      for (std::size_t i = prefix.size(); i < s.size(); ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') throw ParseError("bad segment label '" + s + "'");
        const auto digit = static_cast<std::uint64_t>(c - '0');
        if (k > (UINT64_MAX - digit) / 10) throw ParseError("segment label number overflows: '" + s + "'");
        k = k * 10 + digit;
      }
      return step(k);
    }
    throw ParseError("bad segment label '" + s + "' (expected \"Step <n>\" or \"Answer\")");
  }

  friend bool operator==(const SegmentLabel& a, const SegmentLabel& b) {
    return a.kind == b.kind && (a.is_answer() || a.number == b.number);
  }
};

// A segmented step with character and token extents, both half-open.
struct StepSpan {
  SegmentLabel label;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  std::size_t t_start = 0;
  std::size_t t_end = 0;

  std::size_t token_count() const { return t_end - t_start; }

  friend bool operator==(const StepSpan&, const StepSpan&) = default;
};

// Mean-pooled hidden states of one step: index 0 is the embedding layer
// output, index L the last layer. Stored as float32, consumed as float64.
struct StepStates {
  std::vector<std::vector<float>> pooled_hidden;

  std::size_t layer_count() const { return pooled_hidden.empty() ? 0 : pooled_hidden.size() - 1; }
  std::size_t hidden_dim() const { return pooled_hidden.empty() ? 0 : pooled_hidden.front().size(); }

  friend bool operator==(const StepStates&, const StepStates&) = default;
};

struct Trace {
  std::string id;
  std::string question;
  std::string response_text;
  std::optional<std::string> gold_answer;
  std::vector<TokenScalars> tokens;
  std::vector<StepSpan> steps;
  // Empty when the extractor recorded no hidden states; otherwise 1:1 with steps.
  std::vector<StepStates> step_states;
  // Annotator name -> one score in [0, 1] per step.
  std::map<std::string, std::vector<double>> prm_scores;

  bool has_hidden_states() const { return !step_states.empty(); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

namespace detail {

[[noreturn]] inline void invalid(const Trace& t, const std::string& what) {
  throw ValidationError("trace '" + t.id + "': " + what);
}

}  // namespace detail

// Checks every trace invariant; throws ValidationError naming the field.
inline void validate(const Trace& t) {
  using detail::invalid;
  const std::size_t text_len = text::codepoint_count(t.response_text);

  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    const auto& tok = t.tokens[i];
    const std::string where = "tokens[" + std::to_string(i) + "]";
    if (!(tok.top1_prob > 0.0 && tok.top1_prob <= 1.0)) {
      invalid(t, where + ".top1_prob must lie in (0, 1], got " + std::to_string(tok.top1_prob));
    }
    if (!(tok.entropy >= 0.0) || !std::isfinite(tok.entropy)) {
      invalid(t, where + ".entropy must be finite and >= 0, got " + std::to_string(tok.entropy));
    }
    if (tok.char_start >= tok.char_end) invalid(t, where + " has char_start >= char_end");
    if (tok.char_end > text_len) invalid(t, where + ".char_end exceeds response_text length");
    if (i > 0 && tok.char_start < t.tokens[i - 1].char_end) {
      invalid(t, where + " overlaps or precedes the previous token");
    }
  }

  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    const std::string where = "steps[" + std::to_string(i) + "]";
    if (s.char_start >= s.char_end) invalid(t, where + " has char_start >= char_end");
    if (s.char_end > text_len) invalid(t, where + ".char_end exceeds response_text length");
    if (s.t_start >= s.t_end) invalid(t, where + " has an empty token range");
    if (s.t_end > t.tokens.size()) invalid(t, where + ".t_end exceeds the token count");
    if (s.label.is_answer() && i + 1 != t.steps.size()) invalid(t, where + " is an Answer segment that is not last");
    if (i > 0) {
      const auto& prev = t.steps[i - 1];
      if (s.char_start < prev.char_end) invalid(t, where + " overlaps the previous step (characters)");
      if (s.t_start < prev.t_end) invalid(t, where + " overlaps the previous step (tokens)");
    }
  }

  if (!t.step_states.empty()) {
    if (t.step_states.size() != t.steps.size()) {
      invalid(t, "step_states has " + std::to_string(t.step_states.size()) + " entries for " +
                     std::to_string(t.steps.size()) + " steps");
    }
    const std::size_t layers = t.step_states.front().pooled_hidden.size();
    const std::size_t dim = t.step_states.front().hidden_dim();
    if (layers < 2) invalid(t, "step_states[0].pooled_hidden needs at least 2 layers (L >= 1)");
    if (dim == 0) invalid(t, "step_states[0].pooled_hidden has zero-dimensional vectors");
    for (std::size_t i = 0; i < t.step_states.size(); ++i) {
      const auto& ph = t.step_states[i].pooled_hidden;
      const std::string where = "step_states[" + std::to_string(i) + "].pooled_hidden";
      if (ph.size() != layers) invalid(t, where + " layer count differs from step 0");
      for (std::size_t l = 0; l < ph.size(); ++l) {
        if (ph[l].size() != dim) invalid(t, where + "[" + std::to_string(l) + "] has the wrong dimension");
        for (float v : ph[l]) {
          if (!std::isfinite(v)) invalid(t, where + "[" + std::to_string(l) + "] has a non-finite component");
        }
      }
    }
  }

  for (const auto& [name, scores] : t.prm_scores) {
    if (scores.size() != t.steps.size()) {
      invalid(t, "prm_scores['" + name + "'] has " + std::to_string(scores.size()) + " entries for " +
                     std::to_string(t.steps.size()) + " steps");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
        invalid(t, "prm_scores['" + name + "'][" + std::to_string(i) + "] outside [0, 1]");
      }
    }
  }
}

// Indices of the steps that are scored and evaluated: all reasoning steps,
// plus the Answer segment when exclude_answer is false.
inline std::vector<std::size_t> scored_step_indices(const Trace& t, bool exclude_answer = true) {
  std::vector<std::size_t> out;
  out.reserve(t.steps.size());
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (exclude_answer && t.steps[i].label.is_answer()) continue;
    out.push_back(i);
  }
  return out;
}

}  // namespace automeco
