#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "automeco/report.hpp"

using namespace automeco;
using Metrics = std::map<std::string, RankingMetrics>;

namespace {

RankingMetrics m(double auroc, double fpr95 = 0.5, double aupr = 0.5) { return {auroc, fpr95, aupr, 100, 80}; }

EvalReport full_report() {
  Metrics raw{{"maxprob", m(0.6, 0.4, 0.8)}, {"entropy", m(0.55, 0.7, 0.85)}, {"coe_c", m(0.7, 0.3, 0.9)}};
  Metrics adj{{"maxprob", m(0.67, 0.35, 0.82)}, {"entropy", m(0.5, 0.75, 0.8)}, {"coe_c", m(0.71, 0.3, 0.91)}};
  std::map<std::string, LensCorrelation> corr{{"maxprob", {{0.4, 1e-5}, {0.3, 2e-5}, 90}}};
  ReportConfig cfg;
  cfg.gamma = 0.9;
  cfg.seeds = {7};
  auto r = build_report(raw, adj, corr, cfg, {{"scores", "s.jsonl", content_digest("abc")}});
  BonBlock bon;
  bon.gamma = 0.9;
  bon.lenses["maxprob"] = {0.5, 0.6};
  bon.lenses["entropy"] = {0.4, 0.45};
  bon.lenses["coe_c"] = {0.55, 0.5};
  bon.baselines["majority"] = 0.52;
  bon.n_questions = 40;
  r.bon = bon;
  r.consistency.push_back(compare_rankings(ranking_from_report(r, RankMetric::Auroc),
                                           ranking_from_report(r, RankMetric::BonAcc), "auroc", "bon_acc"));
  return r;
}

}  // namespace

TEST(BuildReport, DeltaIsAdjustedMinusRaw) {
  const auto r = build_report({{"maxprob", m(0.60)}}, Metrics{{"maxprob", m(0.67)}}, {}, {}, {});
  const auto& e = r.lenses.at("maxprob");
  ASSERT_TRUE(e.delta);
  EXPECT_NEAR(e.delta->auroc, 0.07, 1e-12);
  EXPECT_EQ(e.delta->auroc, e.adjusted->auroc - e.raw.auroc);
}

TEST(BuildReport, NoAdjustedBlockMeansNoDelta) {
  const auto r = build_report({{"maxprob", m(0.6)}}, std::nullopt, {}, {}, {});
  EXPECT_FALSE(r.lenses.at("maxprob").adjusted);
  EXPECT_FALSE(r.lenses.at("maxprob").delta);
  const auto j = to_json(r);
  EXPECT_FALSE(j["lenses"]["maxprob"].contains("adjusted"));
  EXPECT_FALSE(j["lenses"]["maxprob"].contains("delta"));
  EXPECT_FALSE(j.contains("bon"));
}

TEST(BuildReport, Errors) {
  EXPECT_THROW(build_report({{"maxprob", m(0.6)}}, Metrics{{"ppl", m(0.6)}}, {}, {}, {}), ValidationError);
  EXPECT_THROW(build_report({}, std::nullopt, {}, {}, {}), ValidationError);
}

TEST(RankingFromReport, Examples) {
  auto r = build_report({{"A", m(0.7, 0.3)}, {"B", m(0.6, 0.5)}}, std::nullopt, {}, {}, {});
  EXPECT_EQ(ranking_from_report(r, RankMetric::Auroc), (MethodRanking{{"A", "B"}, {1, 2}}));
  EXPECT_EQ(ranking_from_report(r, RankMetric::Fpr95), (MethodRanking{{"A", "B"}, {1, 2}}));
  r = build_report({{"B", m(0.5)}, {"A", m(0.5)}}, std::nullopt, {}, {}, {});
  EXPECT_EQ(ranking_from_report(r, RankMetric::Auroc).rank_of("A"), 1);
  EXPECT_THROW(ranking_from_report(r, RankMetric::BonAcc), ValidationError);
  EXPECT_THROW(ranking_from_report(r, RankMetric::Auroc, true), ValidationError);
}

TEST(RankingFromReport, AlwaysAPermutation) {
  const auto r = full_report();
  for (auto metric : {RankMetric::Auroc, RankMetric::Aupr, RankMetric::Fpr95, RankMetric::BonAcc}) {
    for (bool adjusted : {false, true}) {
      const auto ranking = ranking_from_report(r, metric, adjusted);
      EXPECT_NO_THROW(ranking.validate());
      EXPECT_EQ(ranking.size(), 3u);
    }
    EXPECT_EQ(parse_rank_metric(rank_metric_name(metric)), metric);
  }
  EXPECT_THROW(parse_rank_metric("accuracy"), ValidationError);
}

TEST(CompareRankings, Blocks) {
  const auto r = full_report();
  const auto& c = r.consistency.at(0);
  // auroc order: coe_c, maxprob, entropy. bon order: coe_c, maxprob, entropy.
  EXPECT_EQ(c.top_match, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(c.top_order, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(c.cr, 1.0);
  MethodRanking one{{"x"}, {1}};
  const auto single = compare_rankings(one, one, "a", "b");
  EXPECT_EQ(single.top_match.size(), 1u);
}

TEST(ReportJson, RoundTripsLosslessly) {
  const auto r = full_report();
  const auto text = dump_report(r);
  const auto back = report_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, r);
  EXPECT_EQ(dump_report(back), text);
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["schema"], kReportSchema);
  EXPECT_EQ(j["consistency"][0]["cr_percent"], 100.0);
}

TEST(ReportJson, RoundTripsAwkwardDoubles) {
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> u;
  for (int rep = 0; rep < 50; ++rep) {
    const auto r = build_report({{"maxprob", m(u(rng), u(rng), u(rng))}}, Metrics{{"maxprob", m(u(rng))}},
                                {{"maxprob", {{u(rng) - 0.5, u(rng) * 1e-300}, {-u(rng), u(rng)}, 3}}}, {}, {});
    EXPECT_EQ(report_from_json(nlohmann::json::parse(dump_report(r))), r);
  }
}

TEST(ReportJson, RejectsBadDocuments) {
  auto j = nlohmann::json::parse(dump_report(full_report()));
  j["schema"] = "automeco-report/2";
  EXPECT_THROW(report_from_json(j), ParseError);
  EXPECT_THROW(report_from_json(nlohmann::json::array()), ParseError);
  EXPECT_THROW(load_report("/nonexistent/report.json"), IoError);
}

TEST(Digest, Fnv1a) {
  EXPECT_EQ(content_digest(""), "fnv1a64:cbf29ce484222325");
  EXPECT_EQ(content_digest("a"), "fnv1a64:af63dc4c8601ec8c");
  const auto path = std::filesystem::temp_directory_path() / "automeco_digest_test.txt";
  std::ofstream(path, std::ios::binary) << "a";
  const auto d = digest_input("scores", path);
  EXPECT_EQ(d.name, "automeco_digest_test.txt");
  EXPECT_EQ(d.digest, content_digest("a"));
  std::filesystem::remove(path);
  EXPECT_THROW(file_digest(path), IoError);
}

TEST(Csv, Tables) {
  const auto r = build_report({{"maxprob", m(0.5, 0.25, 0.75)}, {"ppl", m(0.6)}},
                              Metrics{{"maxprob", m(0.75, 0.25, 0.75)}, {"ppl", m(0.6)}},
                              {{"ppl", {{0.5, 0.25}, {0.125, 1}, 10}}}, {}, {});
  EXPECT_EQ(metrics_table_csv(r),
            "lens,auroc,fpr95,aupr,adj_auroc,adj_fpr95,adj_aupr,delta_auroc,delta_fpr95,delta_aupr\n"
            "maxprob,0.5,0.25,0.75,0.75,0.25,0.75,0.25,0,0\n"
            "ppl,0.6,0.5,0.5,0.6,0.5,0.5,0,0,0\n");
  EXPECT_EQ(correlation_table_csv(r), "lens,n,spearman,spearman_p,kendall,kendall_p\nppl,10,0.5,0.25,0.125,1\n");
  const auto no_adj = build_report({{"maxprob", m(0.5, 0.25, 0.75)}}, std::nullopt, {}, {}, {});
  EXPECT_EQ(metrics_table_csv(no_adj).substr(metrics_table_csv(no_adj).find('\n') + 1), "maxprob,0.5,0.25,0.75,,,,,,\n");
  EXPECT_EQ(feature_rows_csv({{"t,1", 0, "coe_c", 0.5, 1, 2.0, std::nullopt}}),
            "id,step,lens,score,label,magnitude,angle\n\"t,1\",0,coe_c,0.5,1,2,\n");
}
