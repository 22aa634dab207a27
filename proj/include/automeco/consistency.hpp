#pragma once

// Agreement between two rankings of the same methods: top-K match, last-K
// match, top-K order, and the consistency rate (pairwise concordance minus
// discordance over all method pairs).

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "automeco/errors.hpp"

namespace automeco {

// Rank 1 is the best method. Ranks form a permutation of 1..M.
struct MethodRanking {
  std::vector<std::string> methods;
  std::vector<int> ranks;

  std::size_t size() const { return methods.size(); }

  void validate() const {
    if (methods.size() != ranks.size()) throw ValidationError("ranking: method and rank counts differ");
    if (methods.empty()) throw ValidationError("ranking: no methods");
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<int>(i + 1)) throw ValidationError("ranking: ranks are not a permutation of 1..M");
    }
    std::vector<std::string> names = methods;
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw ValidationError("ranking: duplicate method name");
    }
  }

  int rank_of(const std::string& method) const {
    for (std::size_t i = 0; i < methods.size(); ++i) {
      if (methods[i] == method) return ranks[i];
    }
    throw ValidationError("ranking: unknown method '" + method + "'");
  }

  const std::string& method_at_rank(int rank) const {
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      if (ranks[i] == rank) return methods[i];
    }
    throw ValidationError("ranking: no method at rank " + std::to_string(rank));
  }

  friend bool operator==(const MethodRanking&, const MethodRanking&) = default;
};

namespace detail {

// Beta's ranks reordered to alpha's method order.
inline std::vector<int> aligned_ranks(const MethodRanking& alpha, const MethodRanking& beta) {
  alpha.validate();
  beta.validate();
  if (alpha.size() != beta.size()) throw ValidationError("rankings cover different method sets");
  std::map<std::string, int> beta_rank;
  for (std::size_t i = 0; i < beta.size(); ++i) beta_rank[beta.methods[i]] = beta.ranks[i];
  std::vector<int> out;
  out.reserve(alpha.size());
  for (const auto& m : alpha.methods) {
    auto it = beta_rank.find(m);
    if (it == beta_rank.end()) throw ValidationError("rankings cover different method sets ('" + m + "')");
    out.push_back(it->second);
  }
  return out;
}

inline void check_k(std::size_t k, std::size_t m) {
  if (k < 1 || k > m) throw ValidationError("K must lie in [1, " + std::to_string(m) + "], got " + std::to_string(k));
}

}  // namespace detail

// 1 iff alpha's best method is among beta's K best.
inline int top_match(const MethodRanking& alpha, const MethodRanking& beta, std::size_t k) {
  detail::aligned_ranks(alpha, beta);
  detail::check_k(k, alpha.size());
  return beta.rank_of(alpha.method_at_rank(1)) <= static_cast<int>(k) ? 1 : 0;
}

// 1 iff alpha's worst method is among beta's K worst.
inline int last_match(const MethodRanking& alpha, const MethodRanking& beta, std::size_t k) {
  detail::aligned_ranks(alpha, beta);
  detail::check_k(k, alpha.size());
  const auto m = static_cast<int>(alpha.size());
  return beta.rank_of(alpha.method_at_rank(m)) > m - static_cast<int>(k) ? 1 : 0;
}

inline int top_order(const MethodRanking& alpha, const MethodRanking& beta, std::size_t k) {
  return top_match(alpha, beta, k) * last_match(alpha, beta, k);
}

// In [-1, 1]; multiply by 100 for the percentage convention.
inline double consistency_rate(const MethodRanking& alpha, const MethodRanking& beta) {
  const auto b = detail::aligned_ranks(alpha, beta);
  const std::size_t m = alpha.size();
  if (m < 2) throw ValidationError("consistency rate needs at least 2 methods");
  long long net = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const long long prod = static_cast<long long>(alpha.ranks[i] - alpha.ranks[j]) * (b[i] - b[j]);
      net += (prod > 0) - (prod < 0);
    }
  }
  return 2.0 * static_cast<double>(net) / (static_cast<double>(m) * static_cast<double>(m - 1));
}

}  // namespace automeco
