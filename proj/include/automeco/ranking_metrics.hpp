#pragma once

// Threshold-free ranking metrics over (score, label) pairs. The positive class
// is label 1, a correct step; a higher score means "more likely correct".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "automeco/errors.hpp"

namespace automeco {

struct ScoredLabels {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 or 1

  std::size_t size() const { return scores.size(); }
};

struct ClassCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

namespace detail {

inline ClassCounts check_scored_labels(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                          std::to_string(labels.size()) + ")");
  }
  ClassCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw ValidationError("score " + std::to_string(i) + " is not finite");
    if (labels[i] == 1) {
      ++c.positives;
    } else if (labels[i] == 0) {
      ++c.negatives;
    } else {
      throw ValidationError("label " + std::to_string(i) + " is not 0 or 1");
    }
  }
  return c;
}

inline ClassCounts require_both_classes(std::span<const double> scores, std::span<const int> labels,
                                        const char* metric) {
  const auto c = check_scored_labels(scores, labels);
  if (c.positives == 0 || c.negatives == 0) {
    throw UndefinedMetricError(std::string(metric) + " is undefined on single-class data (" +
                               std::to_string(c.positives) + " positive, " + std::to_string(c.negatives) +
                               " negative)");
  }
  return c;
}

// Indices sorted by descending score; ties keep their original order.
inline std::vector<std::size_t> order_descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace detail

// Mann-Whitney AUROC with ties credited 0.5, via the positive-class rank sum.
inline double auroc(std::span<const double> scores, std::span<const int> labels) {
  const auto c = detail::require_both_classes(scores, labels, "AUROC");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the midrank keeps the sum integral.
  long double twice_rank_sum = 0.0L;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const auto twice_midrank = static_cast<long double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[idx[k]] == 1) twice_rank_sum += twice_midrank;
    }
    i = j + 1;
  }
  const auto p = static_cast<long double>(c.positives);
  const auto n = static_cast<long double>(c.negatives);
  const long double twice_u = twice_rank_sum - p * (p + 1.0L);
  return static_cast<double>(twice_u / (2.0L * p * n));
}

inline double auroc(const ScoredLabels& d) { return auroc(d.scores, d.labels); }

// Minimum false-positive rate over thresholds tau in {observed scores, +inf}
// whose rule "score >= tau is positive" reaches TPR >= target_tpr.
inline double fpr_at_tpr(std::span<const double> scores, std::span<const int> labels, double target_tpr = 0.95) {
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    throw ValidationError("target TPR must lie in (0, 1], got " + std::to_string(target_tpr));
  }
  const auto c = detail::require_both_classes(scores, labels, "FPR@TPR");
  const auto order = detail::order_descending(scores);
  const auto pos = static_cast<double>(c.positives);
  const auto neg = static_cast<double>(c.negatives);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  // TPR and FPR only grow as tau decreases, so the first threshold that
  // reaches the target has the smallest FPR.
  while (i < order.size()) {
    const double tau = scores[order[i]];
    while (i < order.size() && scores[order[i]] == tau) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    if (static_cast<double>(tp) / pos >= target_tpr) return static_cast<double>(fp) / neg;
  }
  return 1.0;  // unreachable: the lowest threshold gives TPR = 1
}

inline double fpr_at_tpr(const ScoredLabels& d, double target_tpr = 0.95) {
  return fpr_at_tpr(d.scores, d.labels, target_tpr);
}

// Average precision (no interpolation). Ties are ranked by original index.
inline double aupr(std::span<const double> scores, std::span<const int> labels) {
  const auto c = detail::check_scored_labels(scores, labels);
  if (c.positives == 0) throw UndefinedMetricError("AUPR is undefined without positive labels");
  const auto order = detail::order_descending(scores);
  double sum = 0.0;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]] == 1) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(c.positives);
}

inline double aupr(const ScoredLabels& d) { return aupr(d.scores, d.labels); }

}  // namespace automeco
