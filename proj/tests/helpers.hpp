#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "automeco/lenses.hpp"
#include "automeco/mira.hpp"
#include "automeco/ranking_metrics.hpp"
#include "automeco/segmentation.hpp"
#include "automeco/synth.hpp"
#include "automeco/trace.hpp"

namespace testutil {

struct TokenSpec {
  double top1 = 0.9;
  double entropy = 0.3;
};

// A trace with one "Step k:" segment per entry of `steps` plus an Answer
// segment with `answer` as its body. Each step's first token is its marker.
inline automeco::Trace make_trace(const std::string& id, const std::vector<std::vector<TokenSpec>>& steps,
                                  const std::string& answer = "42", const std::string& question = "q") {
  using namespace automeco;
  Trace t;
  t.id = id;
  t.question = question;
  std::size_t cursor = 0;
  auto push = [&](std::string text, TokenSpec spec) {
    const std::size_t len = text::codepoint_count(text);
    t.tokens.push_back({text, cursor, cursor + len, spec.top1, spec.entropy});
    t.response_text += text;
    cursor += len;
  };
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const auto& toks = steps[k];
    push("Step " + std::to_string(k + 1) + ":", toks.at(0));
    for (std::size_t j = 1; j < toks.size(); ++j) push(" x" + std::to_string(j), toks[j]);
    t.tokens.back().text += "\n";
    t.tokens.back().char_end += 1;
    t.response_text += "\n";
    cursor += 1;
  }
  push("Answer:", {0.95, 0.1});
  push(" " + answer, {0.95, 0.1});
  const auto segs = segment_text(t.response_text);
  t.steps = align_tokens(segs, t.tokens);
  return t;
}

// Random valid trace for round-trip tests: unicode text, optional hidden
// states, gold answer and PRM annotators.
inline automeco::Trace random_trace(std::mt19937_64& rng, std::size_t index) {
  using namespace automeco;
  std::uniform_int_distribution<int> n_steps(1, 6);
  std::uniform_int_distribution<int> n_tok(1, 5);
  std::uniform_real_distribution<double> u01(1e-6, 1.0);
  std::uniform_real_distribution<double> ent(0.0, 5.0);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  const char* words[] = {" alpha", " \xce\xb2" "eta", " \xe2\x88\x91", " \"q\"", " tab\t", " \xf0\x9f\x99\x82", " back\\slash"};

  Trace t;
  t.id = "rt-" + std::to_string(index);
  t.question = "What is \xce\xb1 + " + std::to_string(index) + "?\n\"quoted\"";
  if (rng() % 2 == 0) t.gold_answer = std::to_string(rng() % 1000);
  std::size_t cursor = 0;
  auto push = [&](const std::string& text) {
    const std::size_t len = text::codepoint_count(text);
    t.tokens.push_back({text, cursor, cursor + len, u01(rng), ent(rng)});
    t.response_text += text;
    cursor += len;
  };
  if (rng() % 3 == 0) {
    t.response_text += "Preamble \xe2\x80\xa6 ";
    cursor = text::codepoint_count(t.response_text);
  }
  const int steps = n_steps(rng);
  for (int k = 0; k < steps; ++k) {
    push("Step " + std::to_string(k + 1) + ":");
    const int body = n_tok(rng) - 1;
    for (int j = 0; j < body; ++j) push(words[rng() % std::size(words)]);
    push("\n");
  }
  const bool with_answer = rng() % 4 != 0;
  if (with_answer) {
    push("Answer:");
    push(" " + std::to_string(rng() % 100));
  }
  t.steps = align_tokens(segment_text(t.response_text), t.tokens);

  if (rng() % 2 == 0) {
    const std::size_t layers = 2 + rng() % 4;
    const std::size_t dim = 1 + rng() % 6;
    for (std::size_t s = 0; s < t.steps.size(); ++s) {
      StepStates st;
      for (std::size_t l = 0; l < layers; ++l) {
        std::vector<float> v(dim);
        for (auto& x : v) x = normal(rng) * 1e3f;
        st.pooled_hidden.push_back(std::move(v));
      }
      t.step_states.push_back(std::move(st));
    }
  }
  const std::size_t annotators = rng() % 3;
  for (std::size_t a = 0; a < annotators; ++a) {
    std::vector<double> scores;
    for (std::size_t s = 0; s < t.steps.size(); ++s) scores.push_back(a == 0 && s == 0 ? 0.0 : u01(rng));
    t.prm_scores.emplace("prm-" + std::to_string(a), std::move(scores));
  }
  validate(t);
  return t;
}

// Lens AUROC pooled over every scored step of a synthetic corpus, optionally
// after MIRA adjustment.
inline double pooled_auroc(const automeco::SynthCorpus& corpus, automeco::LensKind lens,
                           std::optional<double> gamma = std::nullopt) {
  using namespace automeco;
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i = 0; i < corpus.traces.size(); ++i) {
    const auto& t = corpus.traces[i];
    auto values = score_trace(t, lens).values;
    if (gamma) values = mira_adjust(values, *gamma);
    const auto idx = scored_step_indices(t, true);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      scores.push_back(values[k]);
      labels.push_back(corpus.ground_truth[i][idx[k]]);
    }
  }
  return auroc(scores, labels);
}

}  // namespace testutil
