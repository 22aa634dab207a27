#pragma once

// Best-of-N verification: pick one of N sampled responses per question and
// check its final answer against the gold answer. Selectors:
//
//   lens:<kind>[,mira:<gamma>]  highest mean (optionally MIRA-adjusted) lens score
//   majority                    most frequent extracted answer
//   prm:<annotator>             highest mean PRM step score
//
// Answers compare by exact string equality after canonicalization (trim,
// strip commas, drop a leading '+'); there is no symbolic equivalence.

#include <charconv>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "automeco/errors.hpp"
#include "automeco/lenses.hpp"
#include "automeco/mira.hpp"
#include "automeco/text.hpp"
#include "automeco/trace.hpp"

namespace automeco {

enum class AnswerStyle { IntegerAfterAnswer, Boxed };

inline AnswerStyle parse_answer_style(std::string_view s) {
  if (s == "integer") return AnswerStyle::IntegerAfterAnswer;
  if (s == "boxed") return AnswerStyle::Boxed;
  throw ValidationError("unknown answer style '" + std::string(s) + "' (expected integer or boxed)");
}

inline std::string_view answer_style_name(AnswerStyle s) {
  return s == AnswerStyle::Boxed ? "boxed" : "integer";
}

inline std::string canonicalize_answer(std::string_view raw) {
  std::string out;
  for (char c : text::trim(raw)) {
    if (c != ',') out += c;
  }
  out = std::string(text::trim(out));
  if (!out.empty() && out.front() == '+') out.erase(0, 1);
  return out;
}

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::optional<std::string> extract_integer_answer(std::string_view s) {
  constexpr std::string_view marker = "Answer:";
  const auto pos = s.rfind(marker);
  if (pos == std::string_view::npos) return std::nullopt;
  std::size_t i = pos + marker.size();
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  std::string out;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    if (s[i] == '-') out += '-';
    ++i;
  }
  if (i >= s.size() || !is_digit(s[i])) return std::nullopt;
  while (i < s.size() && (is_digit(s[i]) || s[i] == ',')) {
    if (s[i] != ',') out += s[i];
    ++i;
  }
  return out;
}

inline std::optional<std::string> extract_boxed_answer(std::string_view s) {
  constexpr std::string_view marker = "\\boxed{";
  const auto pos = s.rfind(marker);
  if (pos == std::string_view::npos) return std::nullopt;
  const std::size_t begin = pos + marker.size();
  int depth = 1;
  for (std::size_t i = begin; i < s.size(); ++i) {
    if (s[i] == '{') {
      ++depth;
    } else if (s[i] == '}') {
      if (--depth == 0) return std::string(text::trim(s.substr(begin, i - begin)));
    }
  }
  return std::nullopt;  // unbalanced
}

}  // namespace detail

// The final answer of a response, canonicalized, or nullopt when absent.
inline std::optional<std::string> extract_answer(std::string_view response_text, AnswerStyle style) {
  auto raw = style == AnswerStyle::Boxed ? detail::extract_boxed_answer(response_text)
                                         : detail::extract_integer_answer(response_text);
  if (!raw) return std::nullopt;
  return canonicalize_answer(*raw);
}

struct CandidateScores {
  std::size_t candidate_index = 0;
  std::vector<double> step_scores;
};

// Candidate with the highest mean step score; ties go to the lowest index.
inline std::size_t select_best(std::span<const CandidateScores> scored) {
  if (scored.empty()) throw ValidationError("select_best: no candidates");
  std::optional<std::pair<double, std::size_t>> best;
  for (const auto& c : scored) {
    if (c.step_scores.empty()) {
      throw ValidationError("select_best: candidate " + std::to_string(c.candidate_index) + " has no scored steps");
    }
    double sum = 0.0;
    for (double s : c.step_scores) sum += s;
    const double mean = sum / static_cast<double>(c.step_scores.size());
    if (!best || mean > best->first || (mean == best->first && c.candidate_index < best->second)) {
      best = {mean, c.candidate_index};
    }
  }
  return best->second;
}

// Most frequent present answer; ties go to the answer that appears first.
inline std::optional<std::string> majority_vote(std::span<const std::optional<std::string>> answers) {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : answers) {
    if (a) ++counts[*a];
  }
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& a : answers) {
    if (!a) continue;
    const auto c = counts[*a];
    if (c > best_count) {
      best = *a;
      best_count = c;
    }
  }
  return best;
}

struct CandidateSet {
  std::string question_id;
  std::vector<Trace> candidates;
  std::optional<std::string> gold_answer;
};

// Candidate with the highest mean PRM score over its scored steps.
inline std::size_t prm_vote(std::span<const Trace> candidates, const std::string& annotator,
                            bool exclude_answer = true) {
  std::vector<CandidateScores> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& t = candidates[i];
    auto it = t.prm_scores.find(annotator);
    if (it == t.prm_scores.end()) {
      throw MissingInputError("trace '" + t.id + "' has no PRM scores from annotator '" + annotator + "'");
    }
    CandidateScores c{i, {}};
    for (auto s : scored_step_indices(t, exclude_answer)) c.step_scores.push_back(it->second[s]);
    scored.push_back(std::move(c));
  }
  return select_best(scored);
}

// Groups traces into candidate sets by identical question text, in order of
// first appearance. The set's id is the id of its first candidate.
inline std::vector<CandidateSet> group_candidates(std::vector<Trace> traces) {
  std::vector<CandidateSet> sets;
  std::map<std::string, std::size_t> by_question;
  for (auto& t : traces) {
    auto [it, inserted] = by_question.emplace(t.question, sets.size());
    if (inserted) sets.push_back({t.id, {}, std::nullopt});
    auto& set = sets[it->second];
    if (t.gold_answer) {
      const auto gold = canonicalize_answer(*t.gold_answer);
      if (set.gold_answer && *set.gold_answer != gold) {
        throw ValidationError("candidates of question '" + set.question_id + "' disagree on the gold answer");
      }
      set.gold_answer = gold;
    }
    set.candidates.push_back(std::move(t));
  }
  return sets;
}

struct Selection {
  std::optional<std::size_t> index;   // chosen candidate, when the selector picks one
  std::optional<std::string> answer;  // its extracted answer
};

using Selector = std::function<Selection(const CandidateSet&)>;

struct SelectorSpec {
  enum class Kind { Lens, Majority, Prm };
  Kind kind = Kind::Majority;
  LensKind lens = LensKind::Maxprob;
  std::optional<double> mira_gamma;
  std::string annotator;

  std::string to_string() const;
};

inline SelectorSpec parse_selector(std::string_view s) {
  SelectorSpec spec;
  if (s == "majority") {
    spec.kind = SelectorSpec::Kind::Majority;
    return spec;
  }
  if (s.rfind("prm:", 0) == 0) {
    spec.kind = SelectorSpec::Kind::Prm;
    spec.annotator = std::string(s.substr(4));
    if (spec.annotator.empty()) throw ValidationError("selector 'prm:' needs an annotator name");
    return spec;
  }
  if (s.rfind("lens:", 0) == 0) {
    spec.kind = SelectorSpec::Kind::Lens;
    auto rest = s.substr(5);
    const auto comma = rest.find(',');
    spec.lens = parse_lens(rest.substr(0, comma));
    if (comma != std::string_view::npos) {
      auto mira = rest.substr(comma + 1);
      if (mira.rfind("mira:", 0) != 0) throw ValidationError("bad selector suffix '" + std::string(mira) + "'");
      const std::string g(mira.substr(5));
      std::size_t used = 0;
      double gamma = 0.0;
      try {
        gamma = std::stod(g, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != g.size()) throw ValidationError("bad MIRA gamma '" + g + "'");
      MiraConfig{gamma}.validate();
      spec.mira_gamma = gamma;
    }
    return spec;
  }
  throw ValidationError("unknown selector '" + std::string(s) +
                        "' (expected lens:<kind>[,mira:<gamma>], majority or prm:<annotator>)");
}

inline std::string SelectorSpec::to_string() const {
  switch (kind) {
    case Kind::Majority: return "majority";
    case Kind::Prm: return "prm:" + annotator;
    case Kind::Lens: {
      std::string out = "lens:" + std::string(lens_name(lens));
      if (mira_gamma) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof(buf), *mira_gamma);
        out += ",mira:" + std::string(buf, res.ptr);
      }
      return out;
    }
  }
  return {};
}

// Per-candidate lens scores, optionally MIRA-adjusted. Candidates whose steps
// are degenerate for the lens, or that have no scored step, are left out;
// `skipped` counts them.
inline std::vector<CandidateScores> score_candidates(const CandidateSet& set, LensKind lens,
                                                     std::optional<double> mira_gamma, bool exclude_answer,
                                                     std::size_t* skipped = nullptr) {
  std::vector<CandidateScores> out;
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    try {
      auto scores = score_trace(set.candidates[i], lens, exclude_answer);
      if (scores.values.empty()) {
        if (skipped) ++*skipped;
        continue;
      }
      if (mira_gamma) scores.values = mira_adjust(scores.values, *mira_gamma);
      out.push_back({i, std::move(scores.values)});
    } catch (const DegenerateError&) {
      if (skipped) ++*skipped;
    }
  }
  return out;
}

inline Selector make_selector(const SelectorSpec& spec, AnswerStyle style, bool exclude_answer = true) {
  switch (spec.kind) {
    case SelectorSpec::Kind::Majority:
      return [style](const CandidateSet& set) {
        std::vector<std::optional<std::string>> answers;
        answers.reserve(set.candidates.size());
        for (const auto& c : set.candidates) answers.push_back(extract_answer(c.response_text, style));
        return Selection{std::nullopt, majority_vote(answers)};
      };
    case SelectorSpec::Kind::Prm:
      return [style, exclude_answer, annotator = spec.annotator](const CandidateSet& set) {
        const auto idx = prm_vote(set.candidates, annotator, exclude_answer);
        return Selection{idx, extract_answer(set.candidates[idx].response_text, style)};
      };
    case SelectorSpec::Kind::Lens:
      return [style, exclude_answer, lens = spec.lens, gamma = spec.mira_gamma](const CandidateSet& set) {
        const auto scored = score_candidates(set, lens, gamma, exclude_answer);
        if (scored.empty()) return Selection{};
        const auto idx = select_best(scored);
        return Selection{idx, extract_answer(set.candidates[idx].response_text, style)};
      };
  }
  throw ValidationError("unhandled selector kind");
}

inline bool selection_correct(const Selection& sel, const CandidateSet& set) {
  return sel.answer && set.gold_answer && *sel.answer == *set.gold_answer;
}

// Fraction of sets whose selected answer equals the gold answer; a missing
// answer counts as wrong.
inline double bon_accuracy(std::span<const CandidateSet> sets, const Selector& selector) {
  if (sets.empty()) throw ValidationError("bon_accuracy: no candidate sets");
  std::size_t correct = 0;
  for (const auto& set : sets) {
    if (selection_correct(selector(set), set)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(sets.size());
}

}  // namespace automeco
