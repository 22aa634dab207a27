#pragma once

// Intrinsic step-confidence lenses. Each lens maps one reasoning step's
// internal states to a score where larger means "more likely correct".
//
//   Maxprob       mean top-1 probability over the step's tokens
//   PPL           1 / (-(1/T) sum ln top1)           (reciprocal perplexity)
//   Entropy       1 / ((1/T) sum H_t)                (reciprocal mean entropy)
//   DeltaEntropy  -(E_i - E_{i-1}), 0 for the first step
//   CoE-R         (1/L) sum_l (M_l / M_total - A_l / A_total)
//   CoE-C         (1/L) |sum_l M_l exp(i A_l)|
//
// M_l and A_l are the magnitude and angle changes between consecutive
// layer-pooled hidden vectors; the totals compare the last layer to the first.
// Reciprocal lenses clamp their denominator at kReciprocalFloor.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "automeco/errors.hpp"
#include "automeco/trace.hpp"

namespace automeco {

inline constexpr double kReciprocalFloor = 1e-12;
inline constexpr double kDegenerateTotal = 1e-12;

enum class LensKind { Maxprob, PPL, Entropy, DeltaEntropy, CoeR, CoeC };

inline constexpr std::array<LensKind, 6> kAllLenses = {LensKind::Maxprob,      LensKind::PPL,  LensKind::Entropy,
                                                       LensKind::DeltaEntropy, LensKind::CoeR, LensKind::CoeC};

inline std::string_view lens_name(LensKind k) {
  switch (k) {
    case LensKind::Maxprob: return "maxprob";
    case LensKind::PPL: return "ppl";
    case LensKind::Entropy: return "entropy";
    case LensKind::DeltaEntropy: return "delta_entropy";
    case LensKind::CoeR: return "coe_r";
    case LensKind::CoeC: return "coe_c";
  }
  return "unknown";
}

// Accepts the canonical names plus case and '-' variants ("CoE-R", "delta-entropy").
inline LensKind parse_lens(std::string_view name) {
  std::string norm;
  for (char c : name) norm += (c == '-') ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (norm == "deltaentropy") norm = "delta_entropy";
  for (auto k : kAllLenses) {
    if (lens_name(k) == norm) return k;
  }
  throw ValidationError("unknown lens '" + std::string(name) +
                        "' (expected maxprob, ppl, entropy, delta_entropy, coe_r or coe_c)");
}

inline bool needs_hidden_states(LensKind k) { return k == LensKind::CoeR || k == LensKind::CoeC; }

struct LensScores {
  LensKind lens = LensKind::Maxprob;
  std::vector<double> values;  // one per scored step

  friend bool operator==(const LensScores&, const LensScores&) = default;
};

namespace detail {

inline double mean_of(std::span<const double> xs, const char* what) {
  if (xs.empty()) throw DegenerateError(std::string(what) + ": empty step");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace detail

inline double maxprob(std::span<const double> step_top1_probs) {
  return detail::mean_of(step_top1_probs, "maxprob");
}

inline double ppl_score(std::span<const double> step_top1_probs) {
  if (step_top1_probs.empty()) throw DegenerateError("ppl: empty step");
  double sum = 0.0;
  for (double p : step_top1_probs) sum += std::log(p);
  const double ppl = -sum / static_cast<double>(step_top1_probs.size());
  return 1.0 / std::max(ppl, kReciprocalFloor);
}

inline double entropy_score(std::span<const double> step_entropies) {
  return 1.0 / std::max(detail::mean_of(step_entropies, "entropy"), kReciprocalFloor);
}

inline std::vector<double> delta_entropy_scores(std::span<const double> step_mean_entropies) {
  if (step_mean_entropies.empty()) throw DegenerateError("delta_entropy: no steps");
  std::vector<double> out(step_mean_entropies.size(), 0.0);
  for (std::size_t i = 1; i < step_mean_entropies.size(); ++i) {
    out[i] = -(step_mean_entropies[i] - step_mean_entropies[i - 1]);
  }
  return out;
}

// Per-transition magnitude and angle changes of a layer trajectory.
struct CoeFeatures {
  std::vector<double> magnitude_profile;  // ||h_{l+1} - h_l||
  std::vector<double> angle_profile;      // arccos(cos(h_{l+1}, h_l)), in [0, pi]
  double mag_total = 0.0;                 // ||h_L - h_0||
  double ang_total = 0.0;                 // arccos(cos(h_L, h_0))
};

namespace detail {

template <typename Vec>
double norm2(const Vec& v) {
  double s = 0.0;
  for (auto x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

template <typename Vec>
double distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

template <typename Vec>
double angle_between(const Vec& a, const Vec& b, double norm_a, double norm_b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return std::acos(std::clamp(dot / (norm_a * norm_b), -1.0, 1.0));
}

// Profiles and totals without checking the totals; zero-norm vectors throw.
template <typename Layers>
CoeFeatures layer_transitions(const Layers& layers) {
  const std::size_t n = std::size(layers);
  if (n < 2) throw DegenerateError("hidden-state trajectory needs at least 2 layers (L >= 1)");
  const std::size_t dim = std::size(layers[0]);
  std::vector<double> norms(n);
  for (std::size_t l = 0; l < n; ++l) {
    if (std::size(layers[l]) != dim) throw ValidationError("hidden-state layers have mismatched dimensions");
    norms[l] = norm2(layers[l]);
    if (!(norms[l] > 0.0)) {
      throw DegenerateError("degenerate hidden state: layer " + std::to_string(l) + " has zero norm");
    }
  }
  CoeFeatures f;
  f.magnitude_profile.reserve(n - 1);
  f.angle_profile.reserve(n - 1);
  for (std::size_t l = 0; l + 1 < n; ++l) {
    f.magnitude_profile.push_back(distance(layers[l + 1], layers[l]));
    f.angle_profile.push_back(angle_between(layers[l + 1], layers[l], norms[l + 1], norms[l]));
  }
  f.mag_total = distance(layers[n - 1], layers[0]);
  f.ang_total = angle_between(layers[n - 1], layers[0], norms[n - 1], norms[0]);
  return f;
}

}  // namespace detail

// `layers` is any indexable range of L+1 equally sized numeric vectors.
// Throws DegenerateError when a vector has zero norm or when either total is
// below kDegenerateTotal (the ratio features divide by them).
template <typename Layers>
CoeFeatures coe_features(const Layers& layers) {
  auto f = detail::layer_transitions(layers);
  if (f.mag_total < kDegenerateTotal) {
    throw DegenerateError("degenerate trajectory: total magnitude change is zero");
  }
  if (f.ang_total < kDegenerateTotal) {
    throw DegenerateError("degenerate trajectory: total angle change is zero");
  }
  return f;
}

// Magnitude and Angle features: mean of the per-layer ratios to the totals.
struct MagnitudeAngle {
  double magnitude = 0.0;
  double angle = 0.0;
};

inline MagnitudeAngle magnitude_angle(const CoeFeatures& f) {
  const auto layers = static_cast<double>(f.magnitude_profile.size());
  MagnitudeAngle out;
  for (std::size_t l = 0; l < f.magnitude_profile.size(); ++l) {
    out.magnitude += f.magnitude_profile[l] / f.mag_total;
    out.angle += f.angle_profile[l] / f.ang_total;
  }
  out.magnitude /= layers;
  out.angle /= layers;
  return out;
}

template <typename Layers>
double coe_r(const Layers& layers) {
  const auto f = coe_features(layers);
  double sum = 0.0;
  for (std::size_t l = 0; l < f.magnitude_profile.size(); ++l) {
    sum += f.magnitude_profile[l] / f.mag_total - f.angle_profile[l] / f.ang_total;
  }
  return sum / static_cast<double>(f.magnitude_profile.size());
}

template <typename Layers>
double coe_c(const Layers& layers) {
  const auto f = detail::layer_transitions(layers);
  double re = 0.0;
  double im = 0.0;
  for (std::size_t l = 0; l < f.magnitude_profile.size(); ++l) {
    re += f.magnitude_profile[l] * std::cos(f.angle_profile[l]);
    im += f.magnitude_profile[l] * std::sin(f.angle_profile[l]);
  }
  return std::sqrt(re * re + im * im) / static_cast<double>(f.magnitude_profile.size());
}

namespace detail {

inline std::vector<double> step_top1(const Trace& t, const StepSpan& s) {
  std::vector<double> out;
  out.reserve(s.token_count());
  for (std::size_t i = s.t_start; i < s.t_end; ++i) out.push_back(t.tokens[i].top1_prob);
  return out;
}

inline std::vector<double> step_entropy(const Trace& t, const StepSpan& s) {
  std::vector<double> out;
  out.reserve(s.token_count());
  for (std::size_t i = s.t_start; i < s.t_end; ++i) out.push_back(t.tokens[i].entropy);
  return out;
}

}  // namespace detail

// Mean token entropy of one step (unweighted over tokens).
inline double step_mean_entropy(const Trace& t, const StepSpan& s) {
  return detail::mean_of(detail::step_entropy(t, s), "entropy");
}

// Scores every scored step of a trace (reasoning steps; the Answer segment
// joins only when exclude_answer is false). Errors carry the trace id and
// step index.
inline LensScores score_trace(const Trace& t, LensKind lens, bool exclude_answer = true) {
  if (needs_hidden_states(lens) && !t.has_hidden_states()) {
    throw MissingInputError("trace '" + t.id + "': lens " + std::string(lens_name(lens)) +
                            " needs step_states, which are absent");
  }
  const auto indices = scored_step_indices(t, exclude_answer);
  LensScores out{lens, {}};
  out.values.reserve(indices.size());

  if (lens == LensKind::DeltaEntropy) {
    if (indices.empty()) return out;
    std::vector<double> means;
    means.reserve(indices.size());
    for (auto i : indices) means.push_back(step_mean_entropy(t, t.steps[i]));
    out.values = delta_entropy_scores(means);
    return out;
  }

  for (auto i : indices) {
    const auto& step = t.steps[i];
    try {
      switch (lens) {
        case LensKind::Maxprob: out.values.push_back(maxprob(detail::step_top1(t, step))); break;
        case LensKind::PPL: out.values.push_back(ppl_score(detail::step_top1(t, step))); break;
        case LensKind::Entropy: out.values.push_back(entropy_score(detail::step_entropy(t, step))); break;
        case LensKind::CoeR: out.values.push_back(coe_r(t.step_states[i].pooled_hidden)); break;
        case LensKind::CoeC: out.values.push_back(coe_c(t.step_states[i].pooled_hidden)); break;
        case LensKind::DeltaEntropy: break;
      }
    } catch (const DegenerateError& e) {
      throw DegenerateError("trace '" + t.id + "' step " + std::to_string(i) + " (" + step.label.to_string() +
                            "): " + e.what());
    }
  }
  return out;
}

}  // namespace automeco
