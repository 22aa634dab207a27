#pragma once

// Synthetic trace corpora with a planted step-correctness signal.
//
// Each trace is an N-step response ("Step k: ..." segments plus an "Answer:"
// segment). Every reasoning step is wrong with probability error_rate, tilted
// towards later steps by position_bias. A step's latent confidence logit is
//
//   base_logit + signal_strength * (correct ? +0.5 : -0.5) + N(0, step_noise^2)
//
// and each of its tokens draws top1_prob = sigmoid(latent + N(0, token_noise^2))
// with entropy shrinking as top1_prob grows. Pooled hidden states follow a
// smooth random walk across layers whose jitter grows for correct steps in
// proportion to signal_strength. PRM scores are planted from the ground truth:
// correct in [0.9, 1), wrong in (0, 0.1].
//
// Randomness: std::mt19937_64 (whose output sequence the standard fixes),
// with hand-written uniform and Box-Muller normal transforms so corpora are
// identical across standard libraries. Trace i draws from its own engine
// seeded by splitmix64(seed, i), so parallel generation equals sequential.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "automeco/errors.hpp"
#include "automeco/parallel.hpp"
#include "automeco/segmentation.hpp"
#include "automeco/trace.hpp"

namespace automeco {

inline constexpr const char* kSynthAnnotator = "synth";

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_traces = 200;
  std::size_t steps_per_trace = 5;
  std::size_t tokens_per_step = 8;
  double error_rate = 0.2;
  double signal_strength = 4.0;
  std::size_t layer_count = 4;  // L; each step stores L+1 pooled vectors
  std::size_t hidden_dim = 8;
  std::size_t samples_per_question = 1;
  // 0 keeps the error rate flat across steps; 1 ramps it from 0 at the first
  // step to 2 * error_rate at the last (clipped to [0, 1]).
  double position_bias = 0.0;
  double base_logit = 1.5;
  double step_noise = 1.0;
  double token_noise = 0.75;

  void validate() const {
    if (!(error_rate >= 0.0 && error_rate <= 1.0)) throw ConfigError("error_rate must lie in [0, 1]");
    if (!(signal_strength >= 0.0) || !std::isfinite(signal_strength)) {
      throw ConfigError("signal_strength must be finite and >= 0");
    }
    if (n_traces < 1 || steps_per_trace < 1 || tokens_per_step < 1 || layer_count < 1 || hidden_dim < 1 ||
        samples_per_question < 1) {
      throw ConfigError("synth counts must all be >= 1");
    }
    if (!(position_bias >= 0.0 && position_bias <= 1.0)) throw ConfigError("position_bias must lie in [0, 1]");
    if (!(step_noise >= 0.0) || !(token_noise >= 0.0)) throw ConfigError("noise scales must be >= 0");
  }
};

struct SynthCorpus {
  std::vector<Trace> traces;
  // Per trace, 1:1 with its steps (the Answer segment included): 1 correct, 0 wrong.
  std::vector<std::vector<int>> ground_truth;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TokenDraft {
  std::string text;
  double top1;
  double entropy;
};

inline double step_error_probability(const SynthConfig& cfg, std::size_t k) {
  double tilt = 0.0;
  if (cfg.steps_per_trace > 1) {
    tilt = 2.0 * static_cast<double>(k) / static_cast<double>(cfg.steps_per_trace - 1) - 1.0;
  }
  return std::clamp(cfg.error_rate * (1.0 + cfg.position_bias * tilt), 0.0, 1.0);
}

inline void draw_tokens(SynthRng& rng, const SynthConfig& cfg, double latent, std::string marker,
                        std::size_t body_tokens, std::vector<TokenDraft>& out, const std::string& body_override = {}) {
  auto draw = [&](std::string text) {
    const double p = std::clamp(sigmoid(latent + cfg.token_noise * rng.normal()), 1e-6, 1.0);
    const double h = (1.0 - p) * 2.5 * std::exp(0.2 * rng.normal());
    out.push_back({std::move(text), p, h});
  };
  draw(std::move(marker));
  if (!body_override.empty()) {
    draw(" " + body_override);
    return;
  }
  for (std::size_t j = 0; j < body_tokens; ++j) draw(" w" + std::to_string(rng.below(1000)));
}

inline std::vector<std::vector<float>> draw_trajectory(SynthRng& rng, const SynthConfig& cfg,
                                                       const std::vector<double>& drift, double jitter) {
  const std::size_t d = cfg.hidden_dim;
  std::vector<double> h(d);
  for (std::size_t k = 0; k < d; ++k) h[k] = rng.normal() + 3.0 * drift[k];
  std::vector<std::vector<float>> layers;
  layers.reserve(cfg.layer_count + 1);
  auto push = [&] {
    std::vector<float> v(d);
    for (std::size_t k = 0; k < d; ++k) v[k] = static_cast<float>(h[k]);
    layers.push_back(std::move(v));
  };
  push();
  for (std::size_t l = 0; l < cfg.layer_count; ++l) {
    for (std::size_t k = 0; k < d; ++k) h[k] += drift[k] + jitter * rng.normal();
    push();
  }
  return layers;
}

inline Trace generate_trace(const SynthConfig& cfg, std::size_t index, std::vector<int>& truth) {
  SynthRng rng(splitmix64(cfg.seed ^ splitmix64(index + 1)));
  const std::size_t question = index / cfg.samples_per_question;
  SynthRng question_rng(splitmix64(cfg.seed ^ splitmix64(~static_cast<std::uint64_t>(question))));
  const std::uint64_t gold = 10 + question_rng.below(990);

  std::vector<int> correct(cfg.steps_per_trace);
  bool all_correct = true;
  for (std::size_t k = 0; k < cfg.steps_per_trace; ++k) {
    correct[k] = rng.uniform() < step_error_probability(cfg, k) ? 0 : 1;
    all_correct = all_correct && correct[k] == 1;
  }
  const std::uint64_t answer = all_correct ? gold : gold + 1 + rng.below(9);

  // Shared per-trace drift direction for the hidden-state walk.
  std::vector<double> drift(cfg.hidden_dim);
  double norm = 0.0;
  for (auto& x : drift) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : drift) x /= (norm > 0.0 ? norm : 1.0);

  Trace t;
  t.id = "synth-" + std::to_string(cfg.seed) + "-" + std::to_string(index);
  t.question = "Synthetic question " + std::to_string(question) + " (seed " + std::to_string(cfg.seed) + ")";
  t.gold_answer = std::to_string(gold);

  std::vector<TokenDraft> drafts;
  std::vector<double> prm;
  auto latent_for = [&](bool ok) {
    return cfg.base_logit + cfg.signal_strength * (ok ? 0.5 : -0.5) + cfg.step_noise * rng.normal();
  };
  auto prm_for = [&](bool ok) { return ok ? 0.9 + 0.1 * rng.uniform() : 0.1 * (1.0 - rng.uniform()); };
  auto jitter_for = [&](bool ok) { return 0.3 * (ok ? 1.0 + 0.25 * cfg.signal_strength : 1.0); };

  for (std::size_t k = 0; k < cfg.steps_per_trace; ++k) {
    const bool ok = correct[k] == 1;
    draw_tokens(rng, cfg, latent_for(ok), "Step " + std::to_string(k + 1) + ":", cfg.tokens_per_step - 1, drafts);
    drafts.back().text += "\n";
    prm.push_back(prm_for(ok));
    t.step_states.push_back({draw_trajectory(rng, cfg, drift, jitter_for(ok))});
    truth.push_back(correct[k]);
  }
  draw_tokens(rng, cfg, latent_for(all_correct), "Answer:", 0, drafts, std::to_string(answer));
  prm.push_back(prm_for(all_correct));
  t.step_states.push_back({draw_trajectory(rng, cfg, drift, jitter_for(all_correct))});
  truth.push_back(all_correct ? 1 : 0);

  std::size_t cursor = 0;
  for (auto& d : drafts) {
    const std::size_t len = text::codepoint_count(d.text);
    t.tokens.push_back({d.text, cursor, cursor + len, d.top1, d.entropy});
    t.response_text += d.text;
    cursor += len;
  }
  const auto segments = segment_text(t.response_text);
  t.steps = align_tokens(segments, t.tokens);
  t.prm_scores.emplace(kSynthAnnotator, std::move(prm));
  validate(t);
  return t;
}

}  // namespace detail

// Pure function of the config; `jobs` only changes how fast it runs.
inline SynthCorpus generate(const SynthConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  SynthCorpus out;
  out.traces.resize(cfg.n_traces);
  out.ground_truth.resize(cfg.n_traces);
  parallel_for(cfg.n_traces, jobs,
               [&](std::size_t i) { out.traces[i] = detail::generate_trace(cfg, i, out.ground_truth[i]); });
  return out;
}

}  // namespace automeco
