#include <gtest/gtest.h>

#include <json.hpp>

#include "automeco/report.hpp"
#include "pipeline.hpp"

using testutil::cli;
using testutil::slurp;
using nlohmann::json;

TEST(Cli, HelpListsSchemaAndExitCodes) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("automeco-trace/1"), std::string::npos);
  EXPECT_NE(r.out.find("segment"), std::string::npos);
  EXPECT_NE(r.out.find("consistency"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"score", "--bogus"}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  const auto r = cli({"adjust", "--gamma", "1.5"}, "");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gamma"), std::string::npos);
}

TEST(Cli, MissingFileExitsTwo) {
  const auto r = cli({"score", "--traces", "/nonexistent/traces.jsonl", "--lens", "maxprob"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/traces.jsonl"), std::string::npos);
  EXPECT_EQ(cli({"--config", "/nonexistent/a.cfg", "segment"}, "Step 1: x").code, 2);
}

TEST(Cli, MalformedTraceExitsOne) {
  const auto r = cli({"score", "--lens", "maxprob"}, "{\"id\": 1}\n");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST(Cli, SegmentWritesJsonSegments) {
  const auto r = cli({"segment"}, "Intro. Step 1: add 2\nStep 2: done\nAnswer: 4");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["label"], "Step 1");
  EXPECT_EQ(j[0]["char_start"], 7);
  EXPECT_EQ(j[2]["label"], "Answer");
  EXPECT_EQ(j[2]["char_end"], 43);
  EXPECT_EQ(cli({"segment"}, "no markers").out, "[{\"label\":\"Step 1\",\"char_start\":0,\"char_end\":10}]\n");
}

TEST(Cli, SynthScoreIsDeterministic) {
  const auto a = cli({"synth", "--seed", "7", "--n-traces", "10"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(cli({"synth", "--seed", "7", "--n-traces", "10"}).out, a.out);
  const auto s1 = cli({"score", "--lens", "maxprob"}, a.out);
  const auto s4 = cli({"score", "--lens", "maxprob", "--jobs", "4"}, a.out);
  ASSERT_EQ(s1.code, 0) << s1.err;
  EXPECT_EQ(s1.out, s4.out);
  std::istringstream lines(s1.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto rec = json::parse(line);
    EXPECT_EQ(rec["lens"], "maxprob");
    EXPECT_EQ(rec["values"].size(), 5u);
    ++n;
  }
  EXPECT_EQ(n, 10);
}

TEST(Cli, ScoreUsesConfigLensesAndIncludeAnswer) {
  const auto dir = testutil::scratch_dir("cli-config");
  std::ofstream(dir / "run.cfg") << "lenses = ppl, coe_c\n";
  const auto traces = cli({"synth", "--seed", "3", "--n-traces", "2", "--steps", "3"}).out;
  const auto r = cli({"--config", (dir / "run.cfg").string(), "score"}, traces);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\"lens\":\"coe_c\""), std::string::npos);
  const auto with_answer = cli({"score", "--lens", "maxprob", "--include-answer"}, traces);
  EXPECT_EQ(json::parse(with_answer.out.substr(0, with_answer.out.find('\n')))["values"].size(), 4u);
  EXPECT_EQ(cli({"score"}, traces).code, 1);
}

TEST(Cli, AdjustAppliesMira) {
  const std::string scores = "{\"id\":\"t\",\"lens\":\"maxprob\",\"values\":[1,0,1]}\n";
  const auto r = cli({"adjust", "--gamma", "0.5"}, scores);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rec = json::parse(r.out);
  EXPECT_EQ(rec["gamma"], 0.5);
  EXPECT_NEAR(rec["values"][0].get<double>(), 0.4442139791616654, 1e-12);
  EXPECT_EQ(cli({"adjust"}, r.out).code, 1);  // already adjusted
}

TEST(Cli, AnnotateLabelsScoredSteps) {
  const auto traces = cli({"synth", "--seed", "3", "--n-traces", "2", "--steps", "3"}).out;
  const auto r = cli({"annotate", "--theta", "0.6"}, traces);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rec = json::parse(r.out.substr(0, r.out.find('\n')));
  EXPECT_EQ(rec["annotator"], "synth");
  EXPECT_EQ(rec["theta"], 0.6);
  EXPECT_EQ(rec["binary"].size(), 3u);
  EXPECT_EQ(rec["ternary"].size(), 3u);
  EXPECT_EQ(cli({"annotate", "--annotator", "other"}, traces).code, 1);
}

TEST(Cli, ConsistencyFromExplicitRanks) {
  const auto r = cli({"consistency", "--alpha-ranks", "a=1,b=2,c=3", "--beta-ranks", "a=1,b=3,c=2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["cr"].get<double>(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(j["cr_percent"].get<double>(), 100.0 / 3.0, 1e-12);
  EXPECT_EQ(j["top_match"], json::parse("[1,1,1]"));
  EXPECT_EQ(j["last_match"], json::parse("[0,1,1]"));
  EXPECT_EQ(cli({"consistency", "--alpha-ranks", "a=1,b=2", "--beta-ranks", "a=1,c=2"}).code, 1);
  EXPECT_EQ(cli({"consistency", "--alpha-ranks", "a=1,b=1", "--beta-ranks", "a=1,b=2"}).code, 1);
}

TEST(Cli, FullPipeline) {
  const auto dir = testutil::scratch_dir("cli-pipeline");
  std::string failure;
  const auto text = testutil::run_pipeline(dir, 2, &failure);
  ASSERT_FALSE(text.empty()) << failure;
  const auto report = automeco::report_from_json(json::parse(text));
  EXPECT_EQ(report.lenses.size(), 6u);
  EXPECT_EQ(report.config.gamma, 0.9);
  EXPECT_EQ(report.config.seeds, (std::vector<std::uint64_t>{7}));
  for (const auto& [lens, e] : report.lenses) {
    ASSERT_TRUE(e.delta) << lens;
    EXPECT_EQ(e.delta->auroc, e.adjusted->auroc - e.raw.auroc);
  }
  EXPECT_GT(report.lenses.at("maxprob").raw.auroc, 0.7);
  ASSERT_TRUE(report.bon);
  EXPECT_EQ(report.bon->n_questions, 12u);
  EXPECT_EQ(report.bon->lenses.size(), 6u);
  EXPECT_TRUE(report.bon->baselines.count("majority"));
  // Planted PRM scores separate the steps, but a question whose candidates all
  // contain a wrong step has no correct answer to pick.
  EXPECT_GE(report.bon->baselines.at("prm:synth"), 0.75);
  EXPECT_FALSE(report.consistency.empty());
  std::vector<std::string> roles;
  for (const auto& in : report.inputs) roles.push_back(in.role);
  for (const char* role : {"scores", "labels", "adjusted", "traces", "bon"}) {
    EXPECT_NE(std::find(roles.begin(), roles.end(), role), roles.end()) << role;
  }
  for (const auto& in : report.inputs) {
    if (in.role == "scores") {
      EXPECT_EQ(in.digest, automeco::content_digest(slurp(dir / "scores.jsonl")));
    }
  }
  EXPECT_EQ(slurp(dir / "features.csv").rfind("id,step,lens,score,label,magnitude,angle\n", 0), 0u);

  const auto c = cli({"consistency", "--alpha", (dir / "report.json").string(), "--beta",
                      (dir / "report.json").string(), "--alpha-metric", "fpr95", "--beta-adjusted"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(json::parse(c.out)["methods"].size(), 6u);
}
