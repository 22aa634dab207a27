#pragma once

// Evaluation report (schema automeco-report/1): per-lens ranking metrics raw
// and MIRA-adjusted, correlations against PRM scores, Best-of-N accuracies,
// ranking-consistency blocks, a config echo, and a digest of every input file.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "automeco/consistency.hpp"
#include "automeco/correlation.hpp"
#include "automeco/errors.hpp"

namespace automeco {

inline constexpr const char* kReportSchema = "automeco-report/1";

struct RankingMetrics {
  double auroc = 0.0;
  double fpr95 = 0.0;
  double aupr = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_positive = 0;

  friend bool operator==(const RankingMetrics&, const RankingMetrics&) = default;
};

struct MetricDelta {
  double auroc = 0.0;
  double fpr95 = 0.0;
  double aupr = 0.0;

  friend bool operator==(const MetricDelta&, const MetricDelta&) = default;
};

struct LensEntry {
  RankingMetrics raw;
  std::optional<RankingMetrics> adjusted;
  std::optional<MetricDelta> delta;  // adjusted - raw

  friend bool operator==(const LensEntry&, const LensEntry&) = default;
};

struct LensCorrelation {
  Correlation spearman;
  Correlation kendall;
  std::size_t n = 0;

  friend bool operator==(const LensCorrelation& a, const LensCorrelation& b) {
    return a.n == b.n && a.spearman.coefficient == b.spearman.coefficient &&
           a.spearman.p_value == b.spearman.p_value && a.kendall.coefficient == b.kendall.coefficient &&
           a.kendall.p_value == b.kendall.p_value;
  }
};

struct BonLensAccuracy {
  std::optional<double> raw;
  std::optional<double> adjusted;

  friend bool operator==(const BonLensAccuracy&, const BonLensAccuracy&) = default;
};

struct BonBlock {
  std::optional<double> gamma;                   // gamma of the adjusted lens selectors
  std::map<std::string, BonLensAccuracy> lenses;  // lens name -> accuracy
  std::map<std::string, double> baselines;       // "majority", "prm:<name>"
  std::size_t n_questions = 0;

  friend bool operator==(const BonBlock&, const BonBlock&) = default;
};

struct ConsistencyBlock {
  std::string alpha;  // e.g. "auroc" or "auroc@adjusted"
  std::string beta;
  std::vector<int> top_match;  // K = 1, 2, ...
  std::vector<int> last_match;
  std::vector<int> top_order;
  double cr = 0.0;

  friend bool operator==(const ConsistencyBlock&, const ConsistencyBlock&) = default;
};

struct InputDigest {
  std::string role;
  std::string name;
  std::string digest;

  friend bool operator==(const InputDigest&, const InputDigest&) = default;
};

struct ReportConfig {
  std::optional<double> gamma;
  double theta = 0.5;
  double theta_low = 0.1;
  double theta_high = 0.9;
  double target_tpr = 0.95;
  bool exclude_answer_segment = true;
  std::vector<std::uint64_t> seeds;

  friend bool operator==(const ReportConfig&, const ReportConfig&) = default;
};

struct EvalReport {
  std::string schema = kReportSchema;
  ReportConfig config;
  std::vector<InputDigest> inputs;
  std::map<std::string, LensEntry> lenses;
  std::map<std::string, LensCorrelation> correlations;
  std::optional<BonBlock> bon;
  std::vector<ConsistencyBlock> consistency;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// 64-bit FNV-1a, printed as "fnv1a64:<16 hex digits>".
inline std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for digesting");
  std::ostringstream buf;
  buf << in.rdbuf();
  return content_digest(buf.str());
}

inline InputDigest digest_input(const std::string& role, const std::filesystem::path& path) {
  return {role, path.filename().string(), file_digest(path)};
}

// Assembles the AutoMeco block. Lens sets of raw and adjusted results must match.
inline EvalReport build_report(const std::map<std::string, RankingMetrics>& raw,
                               const std::optional<std::map<std::string, RankingMetrics>>& adjusted,
                               std::map<std::string, LensCorrelation> correlations, ReportConfig config,
                               std::vector<InputDigest> inputs) {
  if (raw.empty()) throw ValidationError("report: no lens results");
  if (adjusted) {
    bool same = adjusted->size() == raw.size();
    for (const auto& [lens, m] : raw) same = same && adjusted->count(lens) == 1;
    if (!same) throw ValidationError("report: raw and adjusted results cover different lens sets");
  }
  EvalReport r;
  r.config = std::move(config);
  r.inputs = std::move(inputs);
  r.correlations = std::move(correlations);
  for (const auto& [lens, m] : raw) {
    LensEntry e{m, std::nullopt, std::nullopt};
    if (adjusted) {
      const auto& a = adjusted->at(lens);
      e.adjusted = a;
      e.delta = MetricDelta{a.auroc - m.auroc, a.fpr95 - m.fpr95, a.aupr - m.aupr};
    }
    r.lenses.emplace(lens, e);
  }
  return r;
}

enum class RankMetric { BonAcc, Auroc, Aupr, Fpr95 };

inline RankMetric parse_rank_metric(std::string_view s) {
  if (s == "bon_acc") return RankMetric::BonAcc;
  if (s == "auroc") return RankMetric::Auroc;
  if (s == "aupr") return RankMetric::Aupr;
  if (s == "fpr95") return RankMetric::Fpr95;
  throw ValidationError("unknown ranking metric '" + std::string(s) + "' (expected bon_acc, auroc, aupr or fpr95)");
}

inline std::string rank_metric_name(RankMetric m) {
  switch (m) {
    case RankMetric::BonAcc: return "bon_acc";
    case RankMetric::Auroc: return "auroc";
    case RankMetric::Aupr: return "aupr";
    case RankMetric::Fpr95: return "fpr95";
  }
  return "unknown";
}

// Ranks the report's lenses by one metric: rank 1 is best, lower FPR95 is
// better, ties go to the alphabetically first lens name.
inline MethodRanking ranking_from_report(const EvalReport& report, RankMetric metric, bool adjusted = false) {
  std::vector<std::pair<std::string, double>> values;
  const std::string what = rank_metric_name(metric) + (adjusted ? " (adjusted)" : "");
  if (metric == RankMetric::BonAcc) {
    if (!report.bon || report.bon->lenses.empty()) throw ValidationError("report has no Best-of-N lens results");
    for (const auto& [lens, acc] : report.bon->lenses) {
      const auto& v = adjusted ? acc.adjusted : acc.raw;
      if (!v) throw ValidationError("report lacks " + what + " for lens '" + lens + "'");
      values.emplace_back(lens, *v);
    }
  } else {
    if (report.lenses.empty()) throw ValidationError("report has no lens results");
    for (const auto& [lens, entry] : report.lenses) {
      const RankingMetrics* m = &entry.raw;
      if (adjusted) {
        if (!entry.adjusted) throw ValidationError("report lacks " + what + " for lens '" + lens + "'");
        m = &*entry.adjusted;
      }
      const double v = metric == RankMetric::Auroc ? m->auroc : metric == RankMetric::Aupr ? m->aupr : m->fpr95;
      values.emplace_back(lens, v);
    }
  }
  const bool lower_better = metric == RankMetric::Fpr95;
  std::stable_sort(values.begin(), values.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return lower_better ? a.second < b.second : a.second > b.second;
    return a.first < b.first;
  });
  MethodRanking out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.methods.push_back(values[i].first);
    out.ranks.push_back(static_cast<int>(i + 1));
  }
  return out;
}

inline ConsistencyBlock compare_rankings(const MethodRanking& alpha, const MethodRanking& beta, std::string alpha_name,
                                         std::string beta_name, std::size_t k_max = 3) {
  ConsistencyBlock c;
  c.alpha = std::move(alpha_name);
  c.beta = std::move(beta_name);
  const std::size_t kk = std::min(k_max, alpha.size());
  for (std::size_t k = 1; k <= kk; ++k) {
    c.top_match.push_back(top_match(alpha, beta, k));
    c.last_match.push_back(last_match(alpha, beta, k));
    c.top_order.push_back(top_order(alpha, beta, k));
  }
  c.cr = alpha.size() >= 2 ? consistency_rate(alpha, beta) : 1.0;
  return c;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson metrics_json(const RankingMetrics& m) {
  return {{"auroc", m.auroc}, {"fpr95", m.fpr95}, {"aupr", m.aupr}, {"n_steps", m.n_steps}, {"n_positive", m.n_positive}};
}

inline RankingMetrics metrics_from(const nlohmann::json& j) {
  return {j.at("auroc").get<double>(), j.at("fpr95").get<double>(), j.at("aupr").get<double>(),
          j.at("n_steps").get<std::size_t>(), j.at("n_positive").get<std::size_t>()};
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  using detail::ojson;
  ojson j;
  j["schema"] = r.schema;

  ojson cfg;
  cfg["gamma"] = r.config.gamma ? ojson(*r.config.gamma) : ojson(nullptr);
  cfg["theta"] = r.config.theta;
  cfg["theta_low"] = r.config.theta_low;
  cfg["theta_high"] = r.config.theta_high;
  cfg["target_tpr"] = r.config.target_tpr;
  cfg["exclude_answer_segment"] = r.config.exclude_answer_segment;
  cfg["seeds"] = r.config.seeds;
  j["config"] = cfg;

  ojson inputs = ojson::array();
  for (const auto& in : r.inputs) inputs.push_back({{"role", in.role}, {"name", in.name}, {"digest", in.digest}});
  j["inputs"] = inputs;

  ojson lenses = ojson::object();
  for (const auto& [name, e] : r.lenses) {
    ojson le;
    le["raw"] = detail::metrics_json(e.raw);
    if (e.adjusted) le["adjusted"] = detail::metrics_json(*e.adjusted);
    if (e.delta) le["delta"] = {{"auroc", e.delta->auroc}, {"fpr95", e.delta->fpr95}, {"aupr", e.delta->aupr}};
    lenses[name] = le;
  }
  j["lenses"] = lenses;

  ojson corr = ojson::object();
  for (const auto& [name, c] : r.correlations) {
    corr[name] = {{"n", c.n},
                  {"spearman", {{"rho", c.spearman.coefficient}, {"p", c.spearman.p_value}}},
                  {"kendall", {{"tau", c.kendall.coefficient}, {"p", c.kendall.p_value}}}};
  }
  j["correlations"] = corr;

  if (r.bon) {
    ojson b;
    b["gamma"] = r.bon->gamma ? ojson(*r.bon->gamma) : ojson(nullptr);
    b["n_questions"] = r.bon->n_questions;
    ojson bl = ojson::object();
    for (const auto& [name, acc] : r.bon->lenses) {
      ojson a = ojson::object();
      if (acc.raw) a["raw"] = *acc.raw;
      if (acc.adjusted) a["adjusted"] = *acc.adjusted;
      bl[name] = a;
    }
    b["lenses"] = bl;
    ojson base = ojson::object();
    for (const auto& [name, acc] : r.bon->baselines) base[name] = acc;
    b["baselines"] = base;
    j["bon"] = b;
  }

  if (!r.consistency.empty()) {
    ojson cs = ojson::array();
    for (const auto& c : r.consistency) {
      cs.push_back({{"alpha", c.alpha},
                    {"beta", c.beta},
                    {"top_match", c.top_match},
                    {"last_match", c.last_match},
                    {"top_order", c.top_order},
                    {"cr", c.cr},
                    {"cr_percent", 100.0 * c.cr}});
    }
    j["consistency"] = cs;
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != kReportSchema) throw ParseError("unsupported report schema '" + r.schema + "'");

    const auto& cfg = j.at("config");
    if (!cfg.at("gamma").is_null()) r.config.gamma = cfg.at("gamma").get<double>();
    r.config.theta = cfg.at("theta").get<double>();
    r.config.theta_low = cfg.at("theta_low").get<double>();
    r.config.theta_high = cfg.at("theta_high").get<double>();
    r.config.target_tpr = cfg.at("target_tpr").get<double>();
    r.config.exclude_answer_segment = cfg.at("exclude_answer_segment").get<bool>();
    r.config.seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();

    for (const auto& in : j.at("inputs")) {
      r.inputs.push_back({in.at("role").get<std::string>(), in.at("name").get<std::string>(),
                          in.at("digest").get<std::string>()});
    }
    for (auto it = j.at("lenses").begin(); it != j.at("lenses").end(); ++it) {
      LensEntry e;
      e.raw = detail::metrics_from(it->at("raw"));
      if (it->contains("adjusted")) e.adjusted = detail::metrics_from(it->at("adjusted"));
      if (it->contains("delta")) {
        const auto& d = it->at("delta");
        e.delta = MetricDelta{d.at("auroc").get<double>(), d.at("fpr95").get<double>(), d.at("aupr").get<double>()};
      }
      r.lenses.emplace(it.key(), e);
    }
    for (auto it = j.at("correlations").begin(); it != j.at("correlations").end(); ++it) {
      LensCorrelation c;
      c.n = it->at("n").get<std::size_t>();
      c.spearman = {it->at("spearman").at("rho").get<double>(), it->at("spearman").at("p").get<double>()};
      c.kendall = {it->at("kendall").at("tau").get<double>(), it->at("kendall").at("p").get<double>()};
      r.correlations.emplace(it.key(), c);
    }
    if (j.contains("bon")) {
      const auto& b = j.at("bon");
      BonBlock block;
      if (!b.at("gamma").is_null()) block.gamma = b.at("gamma").get<double>();
      block.n_questions = b.at("n_questions").get<std::size_t>();
      for (auto it = b.at("lenses").begin(); it != b.at("lenses").end(); ++it) {
        BonLensAccuracy acc;
        if (it->contains("raw")) acc.raw = it->at("raw").get<double>();
        if (it->contains("adjusted")) acc.adjusted = it->at("adjusted").get<double>();
        block.lenses.emplace(it.key(), acc);
      }
      for (auto it = b.at("baselines").begin(); it != b.at("baselines").end(); ++it) {
        block.baselines.emplace(it.key(), it->get<double>());
      }
      r.bon = block;
    }
    if (j.contains("consistency")) {
      for (const auto& c : j.at("consistency")) {
        r.consistency.push_back({c.at("alpha").get<std::string>(), c.at("beta").get<std::string>(),
                                 c.at("top_match").get<std::vector<int>>(), c.at("last_match").get<std::vector<int>>(),
                                 c.at("top_order").get<std::vector<int>>(), c.at("cr").get<double>()});
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

inline std::string dump_report(const EvalReport& r) { return to_json(r).dump(2) + "\n"; }

inline EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  return report_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV tables

namespace detail {

inline std::string csv_num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// One row per lens: raw, adjusted and delta ranking metrics.
inline std::string metrics_table_csv(const EvalReport& r) {
  using detail::csv_num;
  std::string out = "lens,auroc,fpr95,aupr,adj_auroc,adj_fpr95,adj_aupr,delta_auroc,delta_fpr95,delta_aupr\n";
  for (const auto& [name, e] : r.lenses) {
    out += name + "," + csv_num(e.raw.auroc) + "," + csv_num(e.raw.fpr95) + "," + csv_num(e.raw.aupr);
    if (e.adjusted) {
      out += "," + csv_num(e.adjusted->auroc) + "," + csv_num(e.adjusted->fpr95) + "," + csv_num(e.adjusted->aupr);
      out += "," + csv_num(e.delta->auroc) + "," + csv_num(e.delta->fpr95) + "," + csv_num(e.delta->aupr);
    } else {
      out += ",,,,,,";
    }
    out += "\n";
  }
  return out;
}

inline std::string correlation_table_csv(const EvalReport& r) {
  using detail::csv_num;
  std::string out = "lens,n,spearman,spearman_p,kendall,kendall_p\n";
  for (const auto& [name, c] : r.correlations) {
    out += name + "," + std::to_string(c.n) + "," + csv_num(c.spearman.coefficient) + "," +
           csv_num(c.spearman.p_value) + "," + csv_num(c.kendall.coefficient) + "," + csv_num(c.kendall.p_value) +
           "\n";
  }
  return out;
}

struct FeatureRow {
  std::string trace_id;
  std::size_t step = 0;  // index among the trace's scored steps
  std::string lens;
  double score = 0.0;
  int label = 0;
  std::optional<double> magnitude;  // absent when hidden states are missing or degenerate
  std::optional<double> angle;
};

inline std::string feature_rows_csv(const std::vector<FeatureRow>& rows) {
  using detail::csv_num;
  std::string out = "id,step,lens,score,label,magnitude,angle\n";
  for (const auto& row : rows) {
    out += nlohmann::json(row.trace_id).dump() + "," + std::to_string(row.step) + "," + row.lens + "," +
           csv_num(row.score) + "," + std::to_string(row.label) + "," +
           (row.magnitude ? csv_num(*row.magnitude) : std::string()) + "," +
           (row.angle ? csv_num(*row.angle) : std::string()) + "\n";
  }
  return out;
}

}  // namespace automeco
