#include <gtest/gtest.h>

#include <random>

#include "automeco/annotation.hpp"

using namespace automeco;
using V = std::vector<double>;
using I = std::vector<int>;

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize(V{0.05, 0.95}, 0.5), (I{0, 1}));
  EXPECT_EQ(binarize(V{0.5}, 0.5), (I{1}));
  EXPECT_EQ(binarize(V{0.1, 0.89, 0.9}, 0.9), (I{0, 0, 1}));
}

TEST(Binarize, RejectsBadInput) {
  EXPECT_THROW(binarize(V{0.5}, 0.0), ConfigError);
  EXPECT_THROW(binarize(V{0.5}, 1.0), ConfigError);
  EXPECT_THROW(binarize(V{1.5}, 0.5), ValidationError);
}

TEST(Ternarize, Examples) {
  EXPECT_EQ(ternarize(V{0.05}, 0.1, 0.9), (std::vector<Ternary>{Ternary::Wrong}));
  EXPECT_EQ(ternarize(V{0.5}, 0.1, 0.9), (std::vector<Ternary>{Ternary::Uncertain}));
  EXPECT_EQ(ternarize(V{0.95}, 0.1, 0.9), (std::vector<Ternary>{Ternary::Correct}));
  EXPECT_EQ(ternarize(V{0.1, 0.9}, 0.1, 0.9), (std::vector<Ternary>{Ternary::Wrong, Ternary::Correct}));
}

TEST(Ternarize, RejectsBadBand) {
  EXPECT_THROW(ternarize(V{0.5}, 0.9, 0.1), ConfigError);
  EXPECT_THROW(ternarize(V{0.5}, 0.5, 0.5), ConfigError);
  EXPECT_THROW(ternarize(V{0.5}, 0.0, 0.9), ConfigError);
  EXPECT_THROW(ternarize(V{0.5}, 0.1, 1.0), ConfigError);
}

TEST(CorrelationSubset, Examples) {
  EXPECT_EQ(correlation_subset(V{0.05, 0.5, 0.95}, 0.1, 0.9), (std::vector<std::size_t>{0, 2}));
  EXPECT_TRUE(correlation_subset(V{0.3, 0.5, 0.7}, 0.1, 0.9).empty());
  EXPECT_EQ(correlation_subset(V{0.1, 0.9}, 0.1, 0.9), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(correlation_subset(V{0.0, 1.0}, 0.1, 0.9).empty());
}

TEST(Annotation, SubsetIsExactlyTheConfidentTernaryLabels) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
  V s(500);
  for (auto& x : s) x = u(rng);
  const auto t = ternarize(s, 0.2, 0.8);
  const auto sub = correlation_subset(s, 0.2, 0.8);
  std::size_t k = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool in = k < sub.size() && sub[k] == i;
    EXPECT_EQ(in, t[i] != Ternary::Uncertain);
    if (in) ++k;
  }
}

TEST(Annotation, BinaryIsMonotoneInTheta) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  V s(300);
  for (auto& x : s) x = u(rng);
  const auto lo = binarize(s, 0.3);
  const auto hi = binarize(s, 0.7);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_GE(lo[i], hi[i]);
}

TEST(LabelSteps, CombinesBothLabelings) {
  const auto labels = label_steps(V{0.05, 0.6}, 0.5, 0.1, 0.9);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0], (StepLabel{0.05, 0, Ternary::Wrong}));
  EXPECT_EQ(labels[1], (StepLabel{0.6, 1, Ternary::Uncertain}));
  EXPECT_EQ(ternary_name(Ternary::Correct), "correct");
}
