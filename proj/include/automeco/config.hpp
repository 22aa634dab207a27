#pragma once

// Run configuration shared by the CLI subcommands. A config file is a flat
// list of `key = value` lines; '#' starts a comment. Command-line flags
// override file values, which override the built-in defaults.
//
//   gamma = 0.9
//   theta = 0.5
//   theta_low = 0.1
//   theta_high = 0.9
//   lenses = maxprob, entropy, coe_c
//   exclude_answer_segment = true
//   seed = 7
//   jobs = 4
//   answer_style = integer
//   annotator = math-shepherd

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "automeco/annotation.hpp"
#include "automeco/bon.hpp"
#include "automeco/errors.hpp"
#include "automeco/lenses.hpp"
#include "automeco/mira.hpp"
#include "automeco/text.hpp"

namespace automeco {

struct RunConfig {
  double gamma = kDefaultGamma;
  double theta = kDefaultTheta;
  double theta_low = kDefaultThetaLow;
  double theta_high = kDefaultThetaHigh;
  std::vector<LensKind> lenses;
  bool exclude_answer_segment = true;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  AnswerStyle answer_style = AnswerStyle::IntegerAfterAnswer;
  std::string annotator;  // empty: use the trace's only annotator

  void validate() const {
    MiraConfig{gamma}.validate();
    check_theta(theta);
    check_theta_band(theta_low, theta_high);
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

namespace detail {

inline double parse_config_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  }
  return out;
}

inline std::uint64_t parse_config_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + std::string(key) + "': not a non-negative integer: '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_config_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': not a boolean: '" + std::string(v) + "'");
}

}  // namespace detail

inline std::vector<LensKind> parse_lens_list(std::string_view v) {
  std::vector<LensKind> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const auto item = text::trim(v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.push_back(parse_lens(item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline void apply_config_entry(RunConfig& cfg, std::string_view key, std::string_view value) {
  using namespace detail;
  if (key == "gamma") {
    cfg.gamma = parse_config_double(key, value);
  } else if (key == "theta") {
    cfg.theta = parse_config_double(key, value);
  } else if (key == "theta_low") {
    cfg.theta_low = parse_config_double(key, value);
  } else if (key == "theta_high") {
    cfg.theta_high = parse_config_double(key, value);
  } else if (key == "lenses") {
    cfg.lenses = parse_lens_list(value);
  } else if (key == "exclude_answer_segment") {
    cfg.exclude_answer_segment = parse_config_bool(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_config_u64(key, value);
  } else if (key == "jobs") {
    cfg.jobs = static_cast<std::size_t>(parse_config_u64(key, value));
  } else if (key == "answer_style") {
    cfg.answer_style = parse_answer_style(value);
  } else if (key == "annotator") {
    cfg.annotator = std::string(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = text::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_config_entry(cfg, text::trim(v.substr(0, eq)), text::trim(v.substr(eq + 1)));
    } catch (const ValidationError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

}  // namespace automeco
