#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "automeco/consistency.hpp"

using namespace automeco;

namespace {

MethodRanking ranking(std::vector<int> ranks) {
  MethodRanking r;
  for (std::size_t i = 0; i < ranks.size(); ++i) r.methods.push_back("m" + std::to_string(i));
  r.ranks = std::move(ranks);
  return r;
}

}  // namespace

TEST(ConsistencyRate, Examples) {
  const auto a = ranking({1, 2, 3, 4});
  EXPECT_EQ(consistency_rate(a, a), 1.0);
  EXPECT_EQ(consistency_rate(a, ranking({4, 3, 2, 1})), -1.0);
  EXPECT_EQ(consistency_rate(ranking({1, 2, 3}), ranking({1, 3, 2})), 1.0 / 3.0);
}

TEST(ConsistencyRate, Errors) {
  EXPECT_THROW(consistency_rate(ranking({1}), ranking({1})), ValidationError);
  EXPECT_THROW(consistency_rate(ranking({1, 2}), ranking({1, 2, 3})), ValidationError);
  EXPECT_THROW(consistency_rate(ranking({1, 1}), ranking({1, 2})), ValidationError);
  MethodRanking other = ranking({1, 2});
  other.methods[1] = "zz";
  EXPECT_THROW(consistency_rate(ranking({1, 2}), other), ValidationError);
}

TEST(TopLastOrder, Examples) {
  const auto a = ranking({1, 2, 3, 4, 5, 6});
  EXPECT_EQ(top_match(a, a, 1), 1);
  EXPECT_EQ(last_match(a, a, 1), 1);
  EXPECT_EQ(top_order(a, a, 1), 1);
  // alpha's best is beta's worst
  EXPECT_EQ(top_match(a, ranking({6, 1, 2, 3, 4, 5}), 3), 0);
  // alpha's best is beta's third
  EXPECT_EQ(top_match(a, ranking({3, 1, 2, 4, 5, 6}), 3), 1);
  // alpha's worst is beta's best
  EXPECT_EQ(last_match(a, ranking({2, 3, 4, 5, 6, 1}), 1), 0);
  // alpha's worst is beta's fourth
  EXPECT_EQ(last_match(a, ranking({1, 2, 3, 5, 6, 4}), 3), 1);
  // only the top matches
  EXPECT_EQ(top_order(a, ranking({1, 2, 3, 4, 6, 5}), 1), 0);
  EXPECT_EQ(top_order(a, ranking({6, 2, 3, 4, 5, 1}), 1), 0);
  EXPECT_THROW(top_match(a, a, 0), ValidationError);
  EXPECT_THROW(top_match(a, a, 7), ValidationError);
}

TEST(Consistency, ExhaustiveAgainstBruteForce) {
  for (std::size_t m = 1; m <= 5; ++m) {
    std::vector<int> pa(m);
    std::iota(pa.begin(), pa.end(), 1);
    do {
      std::vector<int> pb(m);
      std::iota(pb.begin(), pb.end(), 1);
      do {
        const auto a = ranking(pa);
        const auto b = ranking(pb);
        const auto best_a = std::find(pa.begin(), pa.end(), 1) - pa.begin();
        const auto worst_a = std::find(pa.begin(), pa.end(), static_cast<int>(m)) - pa.begin();
        for (std::size_t k = 1; k <= m; ++k) {
          const int tm = pb[best_a] <= static_cast<int>(k);
          const int lm = pb[worst_a] > static_cast<int>(m - k);
          ASSERT_EQ(top_match(a, b, k), tm);
          ASSERT_EQ(last_match(a, b, k), lm);
          ASSERT_EQ(top_order(a, b, k), tm * lm);
        }
        if (m >= 2) {
          int net = 0;
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
              const int s = (pa[i] - pa[j]) * (pb[i] - pb[j]);
              net += (s > 0) - (s < 0);
            }
          }
          ASSERT_DOUBLE_EQ(consistency_rate(a, b), 2.0 * net / static_cast<double>(m * (m - 1)));
          ASSERT_EQ(consistency_rate(a, b), consistency_rate(b, a));
        }
      } while (std::next_permutation(pb.begin(), pb.end()));
    } while (std::next_permutation(pa.begin(), pa.end()));
  }
}

TEST(Consistency, MethodOrderDoesNotMatter) {
  MethodRanking a{{"x", "y", "z"}, {1, 2, 3}};
  MethodRanking b{{"z", "x", "y"}, {1, 3, 2}};
  MethodRanking b_sorted{{"x", "y", "z"}, {3, 2, 1}};
  EXPECT_EQ(consistency_rate(a, b), consistency_rate(a, b_sorted));
  // x (alpha's best) is beta's worst; z (alpha's worst) is beta's best.
  EXPECT_EQ(top_match(a, b, 1), 0);
  EXPECT_EQ(last_match(a, b, 1), 0);
  EXPECT_EQ(last_match(a, b, 3), 1);
}
