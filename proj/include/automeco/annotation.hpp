#pragma once

// PRM-as-a-judge step labels. Binary labels follow y = 0 iff s < theta.
// Ternary labels: Wrong iff s <= theta_low, Correct iff s >= theta_high.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "automeco/errors.hpp"

namespace automeco {

inline constexpr double kDefaultTheta = 0.5;
inline constexpr double kDefaultThetaLow = 0.1;
inline constexpr double kDefaultThetaHigh = 0.9;

enum class Ternary { Wrong, Uncertain, Correct };

inline std::string_view ternary_name(Ternary t) {
  switch (t) {
    case Ternary::Wrong: return "wrong";
    case Ternary::Uncertain: return "uncertain";
    case Ternary::Correct: return "correct";
  }
  return "unknown";
}

struct StepLabel {
  double prm_score = 0.0;
  int binary = 0;
  Ternary ternary = Ternary::Uncertain;

  friend bool operator==(const StepLabel&, const StepLabel&) = default;
};

namespace detail {

inline void check_scores(std::span<const double> scores) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw ValidationError("PRM score " + std::to_string(i) + " outside [0, 1]: " + std::to_string(scores[i]));
    }
  }
}

}  // namespace detail

inline void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1), got " + std::to_string(theta));
}

inline void check_theta_band(double theta_low, double theta_high) {
  if (!(theta_low > 0.0 && theta_low < theta_high && theta_high < 1.0)) {
    throw ConfigError("thresholds must satisfy 0 < theta_low < theta_high < 1, got " + std::to_string(theta_low) +
                      " and " + std::to_string(theta_high));
  }
}

inline std::vector<int> binarize(std::span<const double> prm_scores, double theta) {
  check_theta(theta);
  detail::check_scores(prm_scores);
  std::vector<int> out;
  out.reserve(prm_scores.size());
  for (double s : prm_scores) out.push_back(s < theta ? 0 : 1);
  return out;
}

inline std::vector<Ternary> ternarize(std::span<const double> prm_scores, double theta_low, double theta_high) {
  check_theta_band(theta_low, theta_high);
  detail::check_scores(prm_scores);
  std::vector<Ternary> out;
  out.reserve(prm_scores.size());
  for (double s : prm_scores) {
    if (s <= theta_low) {
      out.push_back(Ternary::Wrong);
    } else if (s >= theta_high) {
      out.push_back(Ternary::Correct);
    } else {
      out.push_back(Ternary::Uncertain);
    }
  }
  return out;
}

// Indices in the confident tails (0, theta_low] U [theta_high, 1) used for
// correlation analysis. Scores of exactly 0 or 1 fall outside both tails.
inline std::vector<std::size_t> correlation_subset(std::span<const double> prm_scores, double theta_low,
                                                   double theta_high) {
  check_theta_band(theta_low, theta_high);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < prm_scores.size(); ++i) {
    const double s = prm_scores[i];
    if ((s > 0.0 && s <= theta_low) || (s >= theta_high && s < 1.0)) out.push_back(i);
  }
  return out;
}

inline std::vector<StepLabel> label_steps(std::span<const double> prm_scores, double theta, double theta_low,
                                          double theta_high) {
  const auto bin = binarize(prm_scores, theta);
  const auto ter = ternarize(prm_scores, theta_low, theta_high);
  std::vector<StepLabel> out;
  out.reserve(prm_scores.size());
  for (std::size_t i = 0; i < prm_scores.size(); ++i) out.push_back({prm_scores[i], bin[i], ter[i]});
  return out;
}

}  // namespace automeco
