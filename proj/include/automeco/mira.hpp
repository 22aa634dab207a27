#pragma once

// Markovian intrinsic reward adjustment.
//
// A reasoning trajectory is treated as a deterministic MDP whose states are
// the question plus the steps so far. With one sampled trajectory the max in
// V(S_i) ranges over a single action, so V(S_i) = Q(S_i, R_i) and the backward
// recursion is
//
//   Q_N = s_N                    (V(S_{N+1}) = 0)
//   Q_i = s_i + gamma * Q_{i+1}
//
// Adjusted scores are the softmax of Q over the trajectory.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "automeco/errors.hpp"

namespace automeco {

inline constexpr double kDefaultGamma = 0.9;

struct MiraConfig {
  double gamma = kDefaultGamma;

  // gamma in (0, 1]; gamma == 0 is accepted as a diagnostic mode when allow_zero is set.
  void validate(bool allow_zero = true) const {
    const bool ok = std::isfinite(gamma) && gamma <= 1.0 && (allow_zero ? gamma >= 0.0 : gamma > 0.0);
    if (!ok) throw ConfigError("gamma must lie in (0, 1] (0 allowed as a diagnostic), got " + std::to_string(gamma));
  }
};

inline std::vector<double> q_values(std::span<const double> scores, double gamma) {
  MiraConfig{gamma}.validate();
  if (scores.empty()) throw DegenerateError("mira: empty trajectory");
  std::vector<double> q(scores.size());
  double next = 0.0;
  for (std::size_t i = scores.size(); i-- > 0;) {
    q[i] = scores[i] + gamma * next;
    next = q[i];
  }
  return q;
}

// Softmax with max-subtraction; the result sums to 1.
inline std::vector<double> softmax(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateError("softmax: empty input");
  const double peak = *std::max_element(xs.begin(), xs.end());
  std::vector<double> out(xs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = std::exp(xs[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

inline std::vector<double> mira_adjust(std::span<const double> scores, double gamma) {
  const auto q = q_values(scores, gamma);
  return softmax(q);
}

}  // namespace automeco
