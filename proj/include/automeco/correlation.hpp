#pragma once

// Correlation and agreement statistics: Pearson, Spearman (mid-rank ties),
// Kendall tau-b (Knight's O(n log n) algorithm), and Cohen's kappa maximized
// over a threshold grid. p-values use large-sample approximations: Student t
// with n-2 degrees of freedom for Pearson/Spearman, a tie-corrected normal
// approximation of the concordance statistic for Kendall.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "automeco/errors.hpp"

namespace automeco {

struct Correlation {
  double coefficient = 0.0;
  double p_value = 1.0;
};

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw ValidationError(std::string(what) + ": inputs differ in length (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 3) throw ValidationError(std::string(what) + " needs at least 3 observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw ValidationError(std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

// Two-sided p-value of r under H0 via t = r sqrt((n-2)/(1-r^2)).
inline double t_test_p_value(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2.0;
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) return 0.0;
  const double t = std::abs(r) * std::sqrt(df / denom);
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

inline std::int64_t tied_pairs(std::int64_t run) { return run * (run - 1) / 2; }

}  // namespace detail

// 1-based ranks with ties replaced by their average rank.
inline std::vector<double> midranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "pearson");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("correlation is undefined for a constant input vector");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return {r, detail::t_test_p_value(r, x.size())};
}

inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "spearman");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  return pearson(rx, ry);
}

inline Correlation kendall_tau(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y, "kendall");
  const std::size_t n = x.size();

  std::vector<std::pair<double, double>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {x[i], y[i]};
  std::sort(pts.begin(), pts.end());

  // Ties in x, joint ties in (x, y), and tie-correction sums for the variance.
  std::int64_t x_ties = 0;
  std::int64_t xy_ties = 0;
  double x_v0 = 0.0;  // sum t(t-1)
  double x_v1 = 0.0;  // sum t(t-1)(t-2)
  double x_v2 = 0.0;  // sum t(t-1)(2t+5)
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && pts[j + 1].first == pts[i].first) ++j;
      const auto t = static_cast<std::int64_t>(j - i + 1);
      x_ties += detail::tied_pairs(t);
      const auto td = static_cast<double>(t);
      x_v0 += td * (td - 1.0);
      x_v1 += td * (td - 1.0) * (td - 2.0);
      x_v2 += td * (td - 1.0) * (2.0 * td + 5.0);
      std::size_t k = i;
      while (k <= j) {
        std::size_t m = k;
        while (m + 1 <= j && pts[m + 1].second == pts[k].second) ++m;
        xy_ties += detail::tied_pairs(static_cast<std::int64_t>(m - k + 1));
        k = m + 1;
      }
      i = j + 1;
    }
  }

  // Merge sort on y counting strict inversions (discordant pairs).
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = pts[i].second;
  std::vector<double> buf(n);
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t a = lo;
      std::size_t b = mid;
      std::size_t out = lo;
      while (a < mid && b < hi) {
        if (ys[a] <= ys[b]) {
          buf[out++] = ys[a++];
        } else {
          swaps += static_cast<std::int64_t>(mid - a);
          buf[out++] = ys[b++];
        }
      }
      while (a < mid) buf[out++] = ys[a++];
      while (b < hi) buf[out++] = ys[b++];
    }
    std::swap(ys, buf);
  }

  std::int64_t y_ties = 0;
  double y_v0 = 0.0;
  double y_v1 = 0.0;
  double y_v2 = 0.0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
      const auto t = static_cast<std::int64_t>(j - i + 1);
      y_ties += detail::tied_pairs(t);
      const auto td = static_cast<double>(t);
      y_v0 += td * (td - 1.0);
      y_v1 += td * (td - 1.0) * (td - 2.0);
      y_v2 += td * (td - 1.0) * (2.0 * td + 5.0);
      i = j + 1;
    }
  }

  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  if (total == x_ties || total == y_ties) {
    throw UndefinedMetricError("correlation is undefined for a constant input vector");
  }
  const std::int64_t con_minus_dis = total - x_ties - y_ties + xy_ties - 2 * swaps;
  const double tau = std::clamp(static_cast<double>(con_minus_dis) /
                                    std::sqrt(static_cast<double>(total - x_ties) * static_cast<double>(total - y_ties)),
                                -1.0, 1.0);

  const auto nd = static_cast<double>(n);
  const double m = nd * (nd - 1.0);
  const double var = (m * (2.0 * nd + 5.0) - x_v2 - y_v2) / 18.0 + (x_v0 * y_v0) / (2.0 * m) +
                     (x_v1 * y_v1) / (9.0 * m * (nd - 2.0));
  double p = 1.0;
  if (var > 0.0) {
    const double z = std::abs(static_cast<double>(con_minus_dis)) / std::sqrt(var);
    p = std::erfc(z / std::sqrt(2.0));
  }
  return {tau, std::min(1.0, p)};
}

struct KappaResult {
  double kappa = 0.0;
  double theta_a = 0.0;
  double theta_b = 0.0;
};

// Cohen's kappa of two binary labelings (1 iff score >= threshold). A
// degenerate table with chance agreement 1 scores 0.
inline double cohen_kappa(std::span<const double> a_scores, std::span<const double> b_scores, double theta_a,
                          double theta_b) {
  if (a_scores.size() != b_scores.size()) {
    throw ValidationError("cohen_kappa: inputs differ in length (" + std::to_string(a_scores.size()) + " vs " +
                          std::to_string(b_scores.size()) + ")");
  }
  if (a_scores.empty()) throw ValidationError("cohen_kappa: empty input");
  std::int64_t agree = 0;
  std::int64_t a_pos = 0;
  std::int64_t b_pos = 0;
  for (std::size_t i = 0; i < a_scores.size(); ++i) {
    const bool a = a_scores[i] >= theta_a;
    const bool b = b_scores[i] >= theta_b;
    agree += (a == b) ? 1 : 0;
    a_pos += a ? 1 : 0;
    b_pos += b ? 1 : 0;
  }
  // kappa = (p_o - p_e) / (1 - p_e), scaled by n^2 to stay in integers.
  const auto n = static_cast<std::int64_t>(a_scores.size());
  const std::int64_t chance = a_pos * b_pos + (n - a_pos) * (n - b_pos);
  const std::int64_t denom = n * n - chance;
  if (denom == 0) return 0.0;
  return static_cast<double>(n * agree - chance) / static_cast<double>(denom);
}

// Maximum kappa over grid x grid. Ties go to the lexicographically smaller
// (theta_a, theta_b).
inline KappaResult cohen_kappa_grid(std::span<const double> a_scores, std::span<const double> b_scores,
                                    std::span<const double> grid) {
  if (a_scores.size() != b_scores.size()) {
    throw ValidationError("cohen_kappa_grid: inputs differ in length (" + std::to_string(a_scores.size()) + " vs " +
                          std::to_string(b_scores.size()) + ")");
  }
  if (grid.empty()) throw ValidationError("cohen_kappa_grid: empty threshold grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  KappaResult best{-2.0, sorted.front(), sorted.front()};
  for (double ta : sorted) {
    for (double tb : sorted) {
      const double k = cohen_kappa(a_scores, b_scores, ta, tb);
      if (k > best.kappa) best = {k, ta, tb};
    }
  }
  return best;
}

// The {0.1, 0.2, ..., 0.9} grid used for inter-annotator agreement.
inline std::vector<double> default_kappa_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 9; ++i) g.push_back(static_cast<double>(i) / 10.0);
  return g;
}

}  // namespace automeco
