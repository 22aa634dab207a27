#pragma once

// The `automeco` command-line tool. run() is the whole program; main() only
// forwards argv. Exit codes: 0 success, 1 usage/parse/validation error,
// 2 I/O error. Diagnostics go to `err`, data to `out` or --out files.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "automeco/annotation.hpp"
#include "automeco/bon.hpp"
#include "automeco/config.hpp"
#include "automeco/consistency.hpp"
#include "automeco/correlation.hpp"
#include "automeco/errors.hpp"
#include "automeco/lenses.hpp"
#include "automeco/mira.hpp"
#include "automeco/parallel.hpp"
#include "automeco/ranking_metrics.hpp"
#include "automeco/report.hpp"
#include "automeco/segmentation.hpp"
#include "automeco/synth.hpp"
#include "automeco/trace.hpp"
#include "automeco/trace_io.hpp"

namespace automeco::cli {

inline constexpr const char* kBonSchema = "automeco-bon/1";

using ojson = nlohmann::ordered_json;

// Per-step scores of one trace under one lens, as written by `score` and `adjust`.
struct ScoreRecord {
  std::string id;
  std::string lens;
  std::optional<double> gamma;
  std::vector<double> values;
};

// Step labels of one trace, as written by `annotate`. Covers scored steps only.
struct LabelRecord {
  std::string id;
  std::string annotator;
  double theta = kDefaultTheta;
  double theta_low = kDefaultThetaLow;
  double theta_high = kDefaultThetaHigh;
  std::vector<double> prm_scores;
  std::vector<int> binary;
  std::vector<std::string> ternary;
};

// ---------------------------------------------------------------------------
// Record I/O

inline std::string score_line(const ScoreRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["lens"] = r.lens;
  if (r.gamma) j["gamma"] = *r.gamma;
  j["values"] = r.values;
  return j.dump();
}

inline std::string label_line(const LabelRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["annotator"] = r.annotator;
  j["theta"] = r.theta;
  j["theta_low"] = r.theta_low;
  j["theta_high"] = r.theta_high;
  j["prm_scores"] = r.prm_scores;
  j["binary"] = r.binary;
  j["ternary"] = r.ternary;
  return j.dump();
}

namespace detail {

// Calls fn(json, line_no) for each non-blank line, with uniform error context.
inline void for_each_json_line(std::istream& in, const std::string& source,
                               const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source + ": line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    try {
      if (!j.is_object()) throw ParseError("expected a JSON object");
      fn(j, line_no);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(source + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("read failure on " + source);
}

}  // namespace detail

inline std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& source) {
  std::vector<ScoreRecord> out;
  detail::for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t) {
    ScoreRecord r;
    r.id = j.at("id").get<std::string>();
    r.lens = std::string(lens_name(parse_lens(j.at("lens").get<std::string>())));
    if (j.contains("gamma")) r.gamma = j.at("gamma").get<double>();
    r.values = j.at("values").get<std::vector<double>>();
    out.push_back(std::move(r));
  });
  return out;
}

inline std::vector<LabelRecord> read_labels(std::istream& in, const std::string& source) {
  std::vector<LabelRecord> out;
  detail::for_each_json_line(in, source, [&](const nlohmann::json& j, std::size_t) {
    LabelRecord r;
    r.id = j.at("id").get<std::string>();
    r.annotator = j.at("annotator").get<std::string>();
    r.theta = j.at("theta").get<double>();
    r.theta_low = j.at("theta_low").get<double>();
    r.theta_high = j.at("theta_high").get<double>();
    r.prm_scores = j.at("prm_scores").get<std::vector<double>>();
    r.binary = j.at("binary").get<std::vector<int>>();
    r.ternary = j.at("ternary").get<std::vector<std::string>>();
    if (r.binary.size() != r.prm_scores.size() || r.ternary.size() != r.prm_scores.size()) {
      throw ParseError("label arrays of trace '" + r.id + "' differ in length");
    }
    out.push_back(std::move(r));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Subcommand context

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  RunConfig config;
};

namespace detail {

inline bool is_stdio(const std::string& path) { return path.empty() || path == "-"; }

template <typename Fn>
auto with_input(Context& ctx, const std::string& path, Fn&& fn) {
  if (is_stdio(path)) return fn(ctx.in, std::string("<stdin>"));
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  return fn(static_cast<std::istream&>(f), path);
}

inline void write_output(Context& ctx, const std::string& path, const std::string& data) {
  if (is_stdio(path)) {
    ctx.out << data;
    ctx.out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << data;
  f.flush();
  if (!f) throw IoError("write failure on '" + path + "'");
}

inline std::vector<Trace> input_traces(Context& ctx, const std::string& path) {
  return with_input(ctx, path, [](std::istream& in, const std::string& source) { return read_traces(in, source); });
}

inline std::string read_all(Context& ctx, const std::string& path) {
  return with_input(ctx, path, [](std::istream& in, const std::string&) {
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  });
}

inline std::string resolve_annotator(const RunConfig& cfg, const std::vector<Trace>& traces) {
  if (!cfg.annotator.empty()) return cfg.annotator;
  if (traces.empty()) throw MissingInputError("no traces to annotate");
  const auto& scores = traces.front().prm_scores;
  if (scores.size() != 1) {
    throw ConfigError("trace '" + traces.front().id + "' carries " + std::to_string(scores.size()) +
                      " PRM annotators; choose one with --annotator");
  }
  return scores.begin()->first;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline void cmd_segment(Context& ctx) {
  const std::string textin(std::istreambuf_iterator<char>(ctx.in), std::istreambuf_iterator<char>{});
  ojson arr = ojson::array();
  for (const auto& s : segment_text(textin)) {
    arr.push_back({{"label", s.label.to_string()}, {"char_start", s.char_start}, {"char_end", s.char_end}});
  }
  ctx.out << arr.dump() << "\n";
}

struct ScoreArgs {
  std::string traces = "-";
  std::vector<std::string> lenses;
  std::string out;
};

inline void cmd_score(Context& ctx, const ScoreArgs& a) {
  std::vector<LensKind> lenses = ctx.config.lenses;
  if (!a.lenses.empty()) {
    lenses.clear();
    for (const auto& l : a.lenses) {
      for (auto k : parse_lens_list(l)) lenses.push_back(k);
    }
  }
  if (lenses.empty()) throw ConfigError("score: no lens selected (use --lens or the 'lenses' config key)");

  const auto traces = detail::input_traces(ctx, a.traces);
  std::vector<std::vector<std::optional<std::vector<double>>>> results(traces.size());
  std::vector<std::vector<std::string>> skipped(traces.size());
  parallel_for(traces.size(), ctx.config.jobs, [&](std::size_t i) {
    for (auto lens : lenses) {
      try {
        results[i].push_back(score_trace(traces[i], lens, ctx.config.exclude_answer_segment).values);
      } catch (const DegenerateError& e) {
        results[i].push_back(std::nullopt);
        skipped[i].push_back(e.what());
      }
    }
  });

  std::string data;
  std::size_t n_skipped = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (std::size_t k = 0; k < lenses.size(); ++k) {
      if (!results[i][k]) continue;
      data += score_line({traces[i].id, std::string(lens_name(lenses[k])), std::nullopt, *results[i][k]}) + "\n";
    }
    for (const auto& msg : skipped[i]) {
      ctx.err << "score: skipped degenerate: " << msg << "\n";
      ++n_skipped;
    }
  }
  if (n_skipped > 0) ctx.err << "score: " << n_skipped << " trace/lens pair(s) skipped as degenerate\n";
  detail::write_output(ctx, a.out, data);
}

struct AdjustArgs {
  std::string scores = "-";
  std::string out;
};

inline void cmd_adjust(Context& ctx, const AdjustArgs& a) {
  const double gamma = ctx.config.gamma;
  MiraConfig{gamma}.validate();
  if (gamma == 0.0) ctx.err << "adjust: gamma 0 disables propagation; output is softmax of the raw scores\n";
  const auto records = detail::with_input(ctx, a.scores, [](std::istream& in, const std::string& source) {
    return read_scores(in, source);
  });
  std::string data;
  std::size_t n_skipped = 0;
  for (const auto& r : records) {
    if (r.gamma) throw ValidationError("adjust: trace '" + r.id + "' (" + r.lens + ") is already MIRA-adjusted");
    if (r.values.empty()) {
      ++n_skipped;
      continue;
    }
    data += score_line({r.id, r.lens, gamma, mira_adjust(r.values, gamma)}) + "\n";
  }
  if (n_skipped > 0) ctx.err << "adjust: " << n_skipped << " record(s) without scored steps skipped\n";
  detail::write_output(ctx, a.out, data);
}

struct AnnotateArgs {
  std::string traces = "-";
  std::string out;
};

inline void cmd_annotate(Context& ctx, const AnnotateArgs& a) {
  const auto& cfg = ctx.config;
  check_theta(cfg.theta);
  check_theta_band(cfg.theta_low, cfg.theta_high);
  const auto traces = detail::input_traces(ctx, a.traces);
  const std::string annotator = detail::resolve_annotator(cfg, traces);
  std::string data;
  for (const auto& t : traces) {
    auto it = t.prm_scores.find(annotator);
    if (it == t.prm_scores.end()) {
      throw MissingInputError("trace '" + t.id + "' has no PRM scores from annotator '" + annotator + "'");
    }
    LabelRecord r{t.id, annotator, cfg.theta, cfg.theta_low, cfg.theta_high, {}, {}, {}};
    for (auto i : scored_step_indices(t, cfg.exclude_answer_segment)) r.prm_scores.push_back(it->second[i]);
    for (const auto& l : label_steps(r.prm_scores, cfg.theta, cfg.theta_low, cfg.theta_high)) {
      r.binary.push_back(l.binary);
      r.ternary.emplace_back(ternary_name(l.ternary));
    }
    data += label_line(r) + "\n";
  }
  detail::write_output(ctx, a.out, data);
}

struct EvaluateArgs {
  std::string scores;
  std::string labels;
  std::string adjusted;
  std::string traces;
  std::string features_csv;
  std::string metrics_csv;
  std::string out;
  double target_tpr = 0.95;
};

namespace detail {

struct PooledLens {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<double> corr_scores;  // steps in the PRM correlation subset
  std::vector<double> corr_prm;
};

inline std::map<std::string, PooledLens> pool_scores(const std::vector<ScoreRecord>& records,
                                                      const std::map<std::string, const LabelRecord*>& labels,
                                                      const std::string& source) {
  std::map<std::string, PooledLens> out;
  for (const auto& r : records) {
    auto it = labels.find(r.id);
    if (it == labels.end()) throw ValidationError(source + ": no labels for trace '" + r.id + "'");
    const LabelRecord& lab = *it->second;
    if (lab.binary.size() != r.values.size()) {
      throw ValidationError(source + ": trace '" + r.id + "' (" + r.lens + ") has " + std::to_string(r.values.size()) +
                            " scores but " + std::to_string(lab.binary.size()) + " labels");
    }
    auto& p = out[r.lens];
    p.scores.insert(p.scores.end(), r.values.begin(), r.values.end());
    p.labels.insert(p.labels.end(), lab.binary.begin(), lab.binary.end());
    for (auto i : correlation_subset(lab.prm_scores, lab.theta_low, lab.theta_high)) {
      p.corr_scores.push_back(r.values[i]);
      p.corr_prm.push_back(lab.prm_scores[i]);
    }
  }
  return out;
}

inline RankingMetrics ranking_metrics(const PooledLens& p, double target_tpr) {
  RankingMetrics m;
  m.auroc = auroc(p.scores, p.labels);
  m.fpr95 = fpr_at_tpr(p.scores, p.labels, target_tpr);
  m.aupr = aupr(p.scores, p.labels);
  m.n_steps = p.scores.size();
  m.n_positive = static_cast<std::size_t>(std::count(p.labels.begin(), p.labels.end(), 1));
  return m;
}

inline std::vector<FeatureRow> feature_rows(const std::vector<ScoreRecord>& records,
                                            const std::map<std::string, const LabelRecord*>& labels,
                                            const std::vector<Trace>& traces, bool exclude_answer) {
  std::map<std::string, const Trace*> by_id;
  for (const auto& t : traces) by_id.emplace(t.id, &t);
  std::vector<FeatureRow> rows;
  for (const auto& r : records) {
    auto tit = by_id.find(r.id);
    if (tit == by_id.end()) throw ValidationError("features: trace '" + r.id + "' not found in --traces");
    const Trace& t = *tit->second;
    const auto indices = scored_step_indices(t, exclude_answer);
    if (indices.size() != r.values.size()) {
      throw ValidationError("features: trace '" + r.id + "' has " + std::to_string(indices.size()) +
                            " scored steps but " + std::to_string(r.values.size()) + " scores");
    }
    const LabelRecord& lab = *labels.at(r.id);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      FeatureRow row{r.id, k, r.lens, r.values[k], lab.binary[k], std::nullopt, std::nullopt};
      if (t.has_hidden_states()) {
        try {
          const auto ma = magnitude_angle(coe_features(t.step_states[indices[k]].pooled_hidden));
          row.magnitude = ma.magnitude;
          row.angle = ma.angle;
        } catch (const DegenerateError&) {
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace detail

inline void cmd_evaluate(Context& ctx, const EvaluateArgs& a) {
  auto read_score_file = [&](const std::string& path) {
    return detail::with_input(ctx, path,
                              [](std::istream& in, const std::string& source) { return read_scores(in, source); });
  };
  const auto labels = detail::with_input(ctx, a.labels, [](std::istream& in, const std::string& source) {
    return read_labels(in, source);
  });
  if (labels.empty()) throw MissingInputError("evaluate: label file is empty");
  std::map<std::string, const LabelRecord*> by_id;
  for (const auto& l : labels) {
    if (!by_id.emplace(l.id, &l).second) throw ValidationError("evaluate: duplicate labels for trace '" + l.id + "'");
  }

  const auto raw_records = read_score_file(a.scores);
  if (raw_records.empty()) throw MissingInputError("evaluate: score file is empty");
  for (const auto& r : raw_records) {
    if (r.gamma) throw ValidationError("evaluate: --scores holds MIRA-adjusted scores; pass them via --adjusted");
  }
  const auto raw_pooled = detail::pool_scores(raw_records, by_id, a.scores);

  std::map<std::string, RankingMetrics> raw;
  std::map<std::string, LensCorrelation> correlations;
  for (const auto& [lens, p] : raw_pooled) {
    raw.emplace(lens, detail::ranking_metrics(p, a.target_tpr));
    try {
      correlations.emplace(lens, LensCorrelation{spearman(p.corr_scores, p.corr_prm),
                                                 kendall_tau(p.corr_scores, p.corr_prm), p.corr_scores.size()});
    } catch (const ValidationError& e) {
      ctx.err << "evaluate: no correlation for lens " << lens << ": " << e.what() << "\n";
    }
  }

  ReportConfig rc;
  rc.theta = labels.front().theta;
  rc.theta_low = labels.front().theta_low;
  rc.theta_high = labels.front().theta_high;
  rc.target_tpr = a.target_tpr;
  rc.exclude_answer_segment = ctx.config.exclude_answer_segment;
  if (ctx.config.seed) rc.seeds.push_back(*ctx.config.seed);

  std::vector<InputDigest> inputs;
  auto digest = [&](const std::string& role, const std::string& path) {
    if (detail::is_stdio(path)) throw ValidationError("evaluate: --" + role + " must name a file (digests are recorded)");
    inputs.push_back(digest_input(role, path));
  };
  digest("scores", a.scores);
  digest("labels", a.labels);

  std::optional<std::map<std::string, RankingMetrics>> adjusted;
  if (!a.adjusted.empty()) {
    const auto adj_records = read_score_file(a.adjusted);
    std::optional<double> gamma;
    for (const auto& r : adj_records) {
      if (!r.gamma) throw ValidationError("evaluate: --adjusted record for '" + r.id + "' carries no gamma");
      if (gamma && *gamma != *r.gamma) throw ValidationError("evaluate: --adjusted mixes several gamma values");
      gamma = r.gamma;
    }
    rc.gamma = gamma;
    adjusted.emplace();
    for (const auto& [lens, p] : detail::pool_scores(adj_records, by_id, a.adjusted)) {
      adjusted->emplace(lens, detail::ranking_metrics(p, a.target_tpr));
    }
    digest("adjusted", a.adjusted);
  }

  std::optional<std::vector<Trace>> traces;
  if (!a.traces.empty()) {
    traces = detail::input_traces(ctx, a.traces);
    digest("traces", a.traces);
  }

  auto report = build_report(raw, adjusted, std::move(correlations), rc, std::move(inputs));

  if (!a.features_csv.empty()) {
    if (!traces) throw ConfigError("evaluate: --features-csv needs --traces for the hidden-state features");
    const auto rows = detail::feature_rows(raw_records, by_id, *traces, ctx.config.exclude_answer_segment);
    detail::write_output(ctx, a.features_csv, feature_rows_csv(rows));
  }
  if (!a.metrics_csv.empty()) detail::write_output(ctx, a.metrics_csv, metrics_table_csv(report));
  detail::write_output(ctx, a.out, dump_report(report));
}

struct BonArgs {
  std::string traces = "-";
  std::vector<std::string> selectors;
  std::string out;
};

inline void cmd_bon(Context& ctx, const BonArgs& a) {
  std::vector<SelectorSpec> specs;
  for (const auto& s : a.selectors) specs.push_back(parse_selector(s));
  if (specs.empty()) {
    for (auto lens : ctx.config.lenses) {
      SelectorSpec s;
      s.kind = SelectorSpec::Kind::Lens;
      s.lens = lens;
      specs.push_back(s);
    }
  }
  if (specs.empty()) throw ConfigError("bon: no selector given (use --selector or the 'lenses' config key)");

  const auto sets = group_candidates(detail::input_traces(ctx, a.traces));
  if (sets.empty()) throw MissingInputError("bon: no traces");
  for (const auto& set : sets) {
    if (!set.gold_answer) throw MissingInputError("bon: question '" + set.question_id + "' has no gold answer");
  }

  ojson results = ojson::array();
  for (const auto& spec : specs) {
    const auto selector = make_selector(spec, ctx.config.answer_style, ctx.config.exclude_answer_segment);
    std::vector<Selection> picks(sets.size());
    parallel_for(sets.size(), ctx.config.jobs, [&](std::size_t i) { picks[i] = selector(sets[i]); });
    std::size_t correct = 0;
    ojson questions = ojson::array();
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const bool ok = selection_correct(picks[i], sets[i]);
      correct += ok ? 1 : 0;
      ojson q;
      q["id"] = sets[i].question_id;
      q["n_candidates"] = sets[i].candidates.size();
      q["selected"] = picks[i].index ? ojson(*picks[i].index) : ojson(nullptr);
      q["answer"] = picks[i].answer ? ojson(*picks[i].answer) : ojson(nullptr);
      q["gold"] = *sets[i].gold_answer;
      q["correct"] = ok;
      questions.push_back(q);
    }
    ojson r;
    r["selector"] = spec.to_string();
    r["accuracy"] = static_cast<double>(correct) / static_cast<double>(sets.size());
    r["n_questions"] = sets.size();
    r["questions"] = questions;
    results.push_back(r);
  }
  ojson doc;
  doc["schema"] = kBonSchema;
  doc["answer_style"] = std::string(answer_style_name(ctx.config.answer_style));
  doc["results"] = results;
  detail::write_output(ctx, a.out, doc.dump(2) + "\n");
}

// "a=1,b=2,c=3" -> ranking.
inline MethodRanking parse_ranks(std::string_view s) {
  MethodRanking r;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = text::trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw ValidationError("ranks: expected name=rank, got '" + std::string(item) + "'");
      const auto name = text::trim(item.substr(0, eq));
      const auto value = text::trim(item.substr(eq + 1));
      int rank = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), rank);
      if (name.empty() || res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ValidationError("ranks: bad entry '" + std::string(item) + "'");
      }
      r.methods.emplace_back(name);
      r.ranks.push_back(rank);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  r.validate();
  return r;
}

struct RankingSource {
  std::string report;
  std::string metric;
  bool adjusted = false;
  std::string ranks;
};

struct ConsistencyArgs {
  RankingSource alpha{"", "auroc", false, ""};
  RankingSource beta{"", "bon_acc", false, ""};
  std::string out;
};

namespace detail {

inline std::pair<MethodRanking, std::string> resolve_ranking(const RankingSource& s, const char* side) {
  if (s.report.empty() == s.ranks.empty()) {
    throw ValidationError(std::string("consistency: give exactly one of --") + side + " or --" + side + "-ranks");
  }
  if (!s.ranks.empty()) return {parse_ranks(s.ranks), "ranks"};
  const auto metric = parse_rank_metric(s.metric);
  const auto report = load_report(s.report);
  return {ranking_from_report(report, metric, s.adjusted), s.metric + (s.adjusted ? "@adjusted" : "")};
}

inline ojson consistency_json(const ConsistencyBlock& c, const MethodRanking& alpha) {
  std::vector<std::string> order;
  for (std::size_t r = 1; r <= alpha.size(); ++r) order.push_back(alpha.method_at_rank(static_cast<int>(r)));
  ojson j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["methods"] = order;
  j["top_match"] = c.top_match;
  j["last_match"] = c.last_match;
  j["top_order"] = c.top_order;
  j["cr"] = c.cr;
  j["cr_percent"] = 100.0 * c.cr;
  return j;
}

}  // namespace detail

inline void cmd_consistency(Context& ctx, const ConsistencyArgs& a) {
  const auto [alpha, alpha_name] = detail::resolve_ranking(a.alpha, "alpha");
  const auto [beta, beta_name] = detail::resolve_ranking(a.beta, "beta");
  const auto block = compare_rankings(alpha, beta, alpha_name, beta_name);
  detail::write_output(ctx, a.out, detail::consistency_json(block, alpha).dump(2) + "\n");
}

struct SynthArgs {
  SynthConfig cfg;
  std::string out;
  std::string truth;
};

inline void cmd_synth(Context& ctx, SynthArgs a) {
  if (ctx.config.seed) a.cfg.seed = *ctx.config.seed;
  const auto corpus = generate(a.cfg, ctx.config.jobs);
  std::ostringstream traces;
  write_traces(corpus.traces, traces);
  if (!a.truth.empty()) {
    std::string data;
    for (std::size_t i = 0; i < corpus.traces.size(); ++i) {
      ojson j;
      j["id"] = corpus.traces[i].id;
      j["labels"] = corpus.ground_truth[i];
      data += j.dump() + "\n";
    }
    detail::write_output(ctx, a.truth, data);
  }
  detail::write_output(ctx, a.out, traces.str());
}

struct ReportArgs {
  std::string eval;
  std::string bon;
  std::string out;
};

namespace detail {

inline BonBlock bon_block_from_json(const nlohmann::json& doc, const std::string& source) {
  try {
    if (doc.at("schema").get<std::string>() != kBonSchema) throw ParseError(source + ": not an " + kBonSchema + " file");
    BonBlock b;
    for (const auto& r : doc.at("results")) {
      const auto spec = parse_selector(r.at("selector").get<std::string>());
      const double acc = r.at("accuracy").get<double>();
      b.n_questions = r.at("n_questions").get<std::size_t>();
      if (spec.kind != SelectorSpec::Kind::Lens) {
        b.baselines[spec.to_string()] = acc;
        continue;
      }
      auto& entry = b.lenses[std::string(lens_name(spec.lens))];
      if (spec.mira_gamma) {
        if (b.gamma && *b.gamma != *spec.mira_gamma) {
          throw ValidationError(source + ": adjusted selectors use several gamma values");
        }
        b.gamma = spec.mira_gamma;
        entry.adjusted = acc;
      } else {
        entry.raw = acc;
      }
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ": malformed Best-of-N results: " + e.what());
  }
}

inline bool same_lens_sets(const EvalReport& r) {
  if (!r.bon || r.bon->lenses.size() != r.lenses.size()) return false;
  for (const auto& [lens, acc] : r.bon->lenses) {
    if (r.lenses.count(lens) == 0) return false;
  }
  return true;
}

}  // namespace detail

inline void cmd_report(Context& ctx, const ReportArgs& a) {
  EvalReport report = load_report(a.eval);
  if (!a.bon.empty()) {
    nlohmann::json doc;
    {
      std::ifstream in(a.bon, std::ios::binary);
      if (!in) throw IoError("cannot open '" + a.bon + "'");
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(a.bon + ": invalid JSON: " + e.what());
      }
    }
    report.bon = detail::bon_block_from_json(doc, a.bon);
    report.inputs.push_back(digest_input("bon", a.bon));
  }

  report.consistency.clear();
  if (report.bon && report.lenses.size() >= 2) {
    if (!detail::same_lens_sets(report)) {
      ctx.err << "report: Best-of-N and evaluation cover different lens sets; consistency omitted\n";
    } else {
      bool have_raw = true;
      bool have_adj = true;
      for (const auto& [lens, acc] : report.bon->lenses) {
        have_raw = have_raw && acc.raw.has_value();
        have_adj = have_adj && acc.adjusted.has_value() && report.lenses.at(lens).adjusted.has_value();
      }
      for (bool adjusted : {false, true}) {
        if (adjusted ? !have_adj : !have_raw) continue;
        const std::string suffix = adjusted ? "@adjusted" : "";
        const auto beta = ranking_from_report(report, RankMetric::BonAcc, adjusted);
        for (auto m : {RankMetric::Auroc, RankMetric::Fpr95, RankMetric::Aupr}) {
          report.consistency.push_back(compare_rankings(ranking_from_report(report, m, adjusted), beta,
                                                        rank_metric_name(m) + suffix, "bon_acc" + suffix));
        }
      }
    }
  }
  detail::write_output(ctx, a.out, dump_report(report));
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(std::vector<std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"automeco: step-level meta-cognition evaluation of LLM reasoning traces"};
  app.name("automeco");
  app.footer(std::string("Trace files are JSONL, one trace per line, schema ") + kTraceSchema +
             ".\nConfig file: flat 'key = value' lines (gamma, theta, theta_low, theta_high, lenses,\n"
             "exclude_answer_segment, seed, jobs, answer_style, annotator); flags override it.\n"
             "Exit codes: 0 ok, 1 usage/parse/validation error, 2 I/O error.");
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::size_t jobs = 1;
  auto* jobs_opt = app.add_option("--jobs,-j", jobs, "Worker threads (results do not depend on it)");
  app.add_option("--config", config_path, "Config file with defaults");

  double gamma = kDefaultGamma;
  double theta = kDefaultTheta;
  double theta_low = kDefaultThetaLow;
  double theta_high = kDefaultThetaHigh;
  std::string annotator;
  std::string answer_style;
  std::uint64_t seed = 0;
  bool include_answer = false;
  std::vector<CLI::Option*> gamma_opts, theta_opts, low_opts, high_opts, annot_opts, style_opts, seed_opts,
      include_opts;

  auto add_include_answer = [&](CLI::App* sub) {
    include_opts.push_back(
        sub->add_flag("--include-answer", include_answer, "Score the Answer segment like a step"));
  };

  auto* segment = app.add_subcommand("segment", "Split response text on stdin into steps (JSON on stdout)");

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Per-step lens scores of a trace file, as JSONL");
  score->add_option("--traces", score_args.traces, "Trace JSONL ('-' for stdin)");
  score->add_option("--lens", score_args.lenses,
                    "Lens: maxprob, ppl, entropy, delta_entropy, coe_r, coe_c (repeatable, comma lists ok)");
  score->add_option("--out,-o", score_args.out, "Output file (default stdout)");
  add_include_answer(score);

  AdjustArgs adjust_args;
  auto* adjust = app.add_subcommand("adjust", "MIRA-adjust score JSONL");
  adjust->add_option("--scores", adjust_args.scores, "Score JSONL ('-' for stdin)");
  gamma_opts.push_back(adjust->add_option("--gamma", gamma, "Discount in (0, 1]; 0 is a diagnostic mode"));
  adjust->add_option("--out,-o", adjust_args.out, "Output file (default stdout)");

  AnnotateArgs annotate_args;
  auto* annotate = app.add_subcommand("annotate", "Binary and ternary step labels from PRM scores, as JSONL");
  annotate->add_option("--traces", annotate_args.traces, "Trace JSONL ('-' for stdin)");
  theta_opts.push_back(annotate->add_option("--theta", theta, "Binary threshold"));
  low_opts.push_back(annotate->add_option("--theta-low", theta_low, "Ternary Wrong threshold"));
  high_opts.push_back(annotate->add_option("--theta-high", theta_high, "Ternary Correct threshold"));
  annot_opts.push_back(annotate->add_option("--annotator", annotator, "PRM annotator name"));
  annotate->add_option("--out,-o", annotate_args.out, "Output file (default stdout)");
  add_include_answer(annotate);

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Ranking metrics and correlations as an evaluation report");
  evaluate->add_option("--scores", eval_args.scores, "Raw score JSONL")->required();
  evaluate->add_option("--labels", eval_args.labels, "Label JSONL from annotate")->required();
  evaluate->add_option("--adjusted", eval_args.adjusted, "MIRA-adjusted score JSONL");
  evaluate->add_option("--traces", eval_args.traces, "Trace JSONL (needed for --features-csv)");
  evaluate->add_option("--features-csv", eval_args.features_csv, "Per-step score/label/magnitude/angle CSV");
  evaluate->add_option("--metrics-csv", eval_args.metrics_csv, "Per-lens metric table CSV");
  evaluate->add_option("--target-tpr", eval_args.target_tpr, "TPR target of the FPR metric")
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--out,-o", eval_args.out, "Report file (default stdout)");
  seed_opts.push_back(evaluate->add_option("--seed", seed, "Seed echoed into the report"));
  add_include_answer(evaluate);

  BonArgs bon_args;
  auto* bon = app.add_subcommand("bon", "Best-of-N selection accuracy over candidate sets");
  bon->add_option("--traces", bon_args.traces, "Trace JSONL, candidates grouped by question ('-' for stdin)");
  bon->add_option("--selector", bon_args.selectors, "lens:<kind>[,mira:<gamma>] | majority | prm:<annotator>");
  style_opts.push_back(bon->add_option("--answer-style", answer_style, "integer (Answer: N) or boxed (\\boxed{...})"));
  bon->add_option("--out,-o", bon_args.out, "Output file (default stdout)");
  add_include_answer(bon);

  ConsistencyArgs cons_args;
  auto* consistency = app.add_subcommand("consistency", "Agreement of two method rankings");
  consistency->add_option("--alpha", cons_args.alpha.report, "Report JSON for the first ranking");
  consistency->add_option("--alpha-metric", cons_args.alpha.metric, "bon_acc | auroc | aupr | fpr95");
  consistency->add_flag("--alpha-adjusted", cons_args.alpha.adjusted, "Use MIRA-adjusted values");
  consistency->add_option("--alpha-ranks", cons_args.alpha.ranks, "Explicit ranking, e.g. a=1,b=2");
  consistency->add_option("--beta", cons_args.beta.report, "Report JSON for the second ranking");
  consistency->add_option("--beta-metric", cons_args.beta.metric, "bon_acc | auroc | aupr | fpr95");
  consistency->add_flag("--beta-adjusted", cons_args.beta.adjusted, "Use MIRA-adjusted values");
  consistency->add_option("--beta-ranks", cons_args.beta.ranks, "Explicit ranking, e.g. a=1,b=2");
  consistency->add_option("--out,-o", cons_args.out, "Output file (default stdout)");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Synthetic traces with planted step correctness");
  seed_opts.push_back(synth->add_option("--seed", seed, "Master seed"));
  synth->add_option("--n-traces", synth_args.cfg.n_traces, "Number of traces");
  synth->add_option("--steps", synth_args.cfg.steps_per_trace, "Reasoning steps per trace");
  synth->add_option("--tokens-per-step", synth_args.cfg.tokens_per_step, "Tokens per step");
  synth->add_option("--error-rate", synth_args.cfg.error_rate, "Probability a step is wrong");
  synth->add_option("--signal", synth_args.cfg.signal_strength, "Separation of correct and wrong steps");
  synth->add_option("--position-bias", synth_args.cfg.position_bias, "0 flat, 1 errors concentrated late");
  synth->add_option("--layers", synth_args.cfg.layer_count, "Layer count L (L+1 pooled vectors per step)");
  synth->add_option("--hidden-dim", synth_args.cfg.hidden_dim, "Hidden-state width");
  synth->add_option("--samples-per-question", synth_args.cfg.samples_per_question, "Candidates per question");
  synth->add_option("--out,-o", synth_args.out, "Trace output (default stdout)");
  synth->add_option("--truth", synth_args.truth, "Ground-truth JSONL, one label per step incl. Answer");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Merge an evaluation report with Best-of-N results");
  report->add_option("--eval", report_args.eval, "Report JSON from evaluate")->required();
  report->add_option("--bon", report_args.bon, "Results JSON from bon");
  report->add_option("--out,-o", report_args.out, "Report file (default stdout)");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, err, err);
    return 1;
  }

  auto given = [](const std::vector<CLI::Option*>& opts) {
    return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
  };

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (jobs_opt->count() > 0) cfg.jobs = jobs;
    if (given(gamma_opts)) cfg.gamma = gamma;
    if (given(theta_opts)) cfg.theta = theta;
    if (given(low_opts)) cfg.theta_low = theta_low;
    if (given(high_opts)) cfg.theta_high = theta_high;
    if (given(annot_opts)) cfg.annotator = annotator;
    if (given(style_opts)) cfg.answer_style = parse_answer_style(answer_style);
    if (given(seed_opts)) cfg.seed = seed;
    if (given(include_opts)) cfg.exclude_answer_segment = !include_answer;
    cfg.validate();

    Context ctx{in, out, err, cfg};
    if (*segment) cmd_segment(ctx);
    if (*score) cmd_score(ctx, score_args);
    if (*adjust) cmd_adjust(ctx, adjust_args);
    if (*annotate) cmd_annotate(ctx, annotate_args);
    if (*evaluate) cmd_evaluate(ctx, eval_args);
    if (*bon) cmd_bon(ctx, bon_args);
    if (*consistency) cmd_consistency(ctx, cons_args);
    if (*synth) cmd_synth(ctx, synth_args);
    if (*report) cmd_report(ctx, report_args);
    return 0;
  } catch (const IoError& e) {
    err << "automeco: I/O error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "automeco: error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "automeco: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace automeco::cli
