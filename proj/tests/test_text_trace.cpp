#include <gtest/gtest.h>

#include "automeco/text.hpp"
#include "automeco/trace.hpp"
#include "helpers.hpp"

using namespace automeco;

TEST(Text, CodepointCountsMultibyte) {
  EXPECT_EQ(text::codepoint_count(""), 0u);
  EXPECT_EQ(text::codepoint_count("abc"), 3u);
  EXPECT_EQ(text::codepoint_count("\xce\xb2\xe2\x88\x91\xf0\x9f\x99\x82"), 3u);
}

TEST(Text, ByteToCodepointIndexHasTrailingEntry) {
  const std::string s = "a\xce\xb2z";
  const auto idx = text::byte_to_codepoint_index(s);
  ASSERT_EQ(idx.size(), s.size() + 1);
  EXPECT_EQ(idx[0], 0u);
  EXPECT_EQ(idx[1], 1u);
  EXPECT_EQ(idx[3], 2u);
  EXPECT_EQ(idx.back(), 3u);
}

TEST(Text, SliceCodepoints) {
  EXPECT_EQ(text::slice_codepoints("a\xce\xb2z", 1, 3), "\xce\xb2z");
  EXPECT_EQ(text::slice_codepoints("abc", 0, 0), "");
}

TEST(Text, Trim) {
  EXPECT_EQ(text::trim("  x y\t\n"), "x y");
  EXPECT_EQ(text::trim("   "), "");
}

TEST(SegmentLabel, RoundTripsThroughText) {
  EXPECT_EQ(SegmentLabel::parse("Step 12"), SegmentLabel::step(12));
  EXPECT_EQ(SegmentLabel::parse("Answer"), SegmentLabel::answer());
  EXPECT_EQ(SegmentLabel::step(3).to_string(), "Step 3");
  EXPECT_THROW(SegmentLabel::parse("Step x"), ParseError);
  EXPECT_THROW(SegmentLabel::parse("step 1"), ParseError);
  EXPECT_THROW(SegmentLabel::parse("Step 99999999999999999999999"), ParseError);
}

TEST(TraceValidate, AcceptsWellFormedTrace) {
  const auto t = testutil::make_trace("t", {{{0.9, 0.1}, {0.8, 0.2}}, {{0.5, 1.0}}});
  EXPECT_NO_THROW(validate(t));
  EXPECT_EQ(t.steps.size(), 3u);
  EXPECT_TRUE(t.steps.back().label.is_answer());
}

TEST(TraceValidate, RejectsProbabilityOutOfRange) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}});
  t.tokens[0].top1_prob = 1.5;
  EXPECT_THROW(validate(t), ValidationError);
  t.tokens[0].top1_prob = 0.0;
  EXPECT_THROW(validate(t), ValidationError);
}

TEST(TraceValidate, RejectsNegativeEntropy) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}});
  t.tokens[0].entropy = -0.1;
  EXPECT_THROW(validate(t), ValidationError);
}

TEST(TraceValidate, RejectsPrmLengthMismatch) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}});
  t.prm_scores["p"] = {0.5};
  EXPECT_THROW(validate(t), ValidationError);
  t.prm_scores["p"] = {0.5, 1.2};
  EXPECT_THROW(validate(t), ValidationError);
  t.prm_scores["p"] = {0.5, 1.0};
  EXPECT_NO_THROW(validate(t));
}

TEST(TraceValidate, RejectsStepStateMismatch) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}});
  t.step_states.push_back({{{1.0f, 0.0f}, {0.0f, 1.0f}}});
  EXPECT_THROW(validate(t), ValidationError);
  t.step_states.push_back({{{1.0f, 0.0f}, {0.0f, 1.0f}}});
  EXPECT_NO_THROW(validate(t));
  t.step_states[1].pooled_hidden[1] = {1.0f};
  EXPECT_THROW(validate(t), ValidationError);
  t.step_states[1].pooled_hidden[1] = {1.0f, std::numeric_limits<float>::infinity()};
  EXPECT_THROW(validate(t), ValidationError);
}

TEST(TraceValidate, RejectsSingleLayerStates) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}});
  t.step_states = {{{{1.0f}}}, {{{1.0f}}}};
  EXPECT_THROW(validate(t), ValidationError);
}

TEST(TraceValidate, RejectsOverlappingSteps) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}, {{0.9, 0.1}}});
  t.steps[1].t_start = 0;
  EXPECT_THROW(validate(t), ValidationError);
}

TEST(TraceValidate, RejectsAnswerBeforeLastStep) {
  auto t = testutil::make_trace("t", {{{0.9, 0.1}}, {{0.9, 0.1}}});
  t.steps[0].label = SegmentLabel::answer();
  EXPECT_THROW(validate(t), ValidationError);
}

TEST(TraceValidate, StepRangesAreDisjointAndAscending) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto t = testutil::random_trace(rng, i);
    std::size_t covered = 0;
    for (std::size_t s = 0; s < t.steps.size(); ++s) {
      covered += t.steps[s].token_count();
      if (s > 0) {
        EXPECT_LE(t.steps[s - 1].t_end, t.steps[s].t_start);
      }
    }
    EXPECT_LE(covered, t.tokens.size());
  }
}

TEST(ScoredSteps, ExcludesAnswerByDefault) {
  const auto t = testutil::make_trace("t", {{{0.9, 0.1}}, {{0.9, 0.1}}});
  EXPECT_EQ(scored_step_indices(t), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(scored_step_indices(t, false), (std::vector<std::size_t>{0, 1, 2}));
}
