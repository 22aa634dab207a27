#pragma once

// JSON Lines persistence for traces (schema automeco-trace/1).
//
// Writing is canonical: keys in schema order, float32 fields printed with the
// shortest representation that round-trips a float (<= 9 significant digits),
// float64 fields with the shortest that round-trips a double (<= 17). Reading
// validates every field and every trace invariant.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "automeco/errors.hpp"
#include "automeco/trace.hpp"

namespace automeco {

namespace io {

template <typename Float>
std::string format_float(Float v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_f32(float v) { return format_float(v); }
inline std::string format_f64(double v) { return format_float(v); }

inline std::string quote(const std::string& s) {
  try {
    return nlohmann::json(s).dump();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("string is not valid UTF-8: ") + e.what());
  }
}

// Field access with errors that name the line and the offending field.
class FieldReader {
 public:
  FieldReader(std::size_t line_no, std::string source) : line_no_(line_no), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    std::string where = source_.empty() ? std::string() : source_ + ":";
    throw ParseError(where + "line " + std::to_string(line_no_) + ": field '" + field + "': " + what);
  }

  const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + key, "missing");
    return *it;
  }

  void require_object(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void require_array(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_array()) fail(path, "expected an array");
  }

  void only_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> keys, const std::string& path) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (auto k : keys) known = known || it.key() == k;
      if (!known) fail(path + it.key(), "unknown field");
    }
  }

  std::string string(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }

  std::size_t index(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
      fail(path, "expected a non-negative integer");
    }
    return j.get<std::size_t>();
  }

  double f64(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
  }

  float f32(const nlohmann::json& j, const std::string& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    return static_cast<float>(j.get<double>());
  }

 private:
  std::size_t line_no_;
  std::string source_;
};

}  // namespace io

inline std::string to_jsonl_line(const Trace& t) {
  using io::format_f32;
  using io::format_f64;
  using io::quote;
  std::string out;
  out.reserve(256 + t.response_text.size() + t.tokens.size() * 96);
  out += "{\"id\":" + quote(t.id);
  out += ",\"question\":" + quote(t.question);
  out += ",\"response_text\":" + quote(t.response_text);
  out += ",\"gold_answer\":";
  out += t.gold_answer ? quote(*t.gold_answer) : std::string("null");

  out += ",\"tokens\":[";
  for (std::size_t i = 0; i < t.tokens.size(); ++i) {
    const auto& tok = t.tokens[i];
    if (i) out += ',';
    out += "{\"text\":" + quote(tok.text);
    out += ",\"char_start\":" + std::to_string(tok.char_start);
    out += ",\"char_end\":" + std::to_string(tok.char_end);
    out += ",\"top1_prob\":" + format_f64(tok.top1_prob);
    out += ",\"entropy\":" + format_f64(tok.entropy) + "}";
  }

  out += "],\"steps\":[";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    if (i) out += ',';
    out += "{\"label\":" + quote(s.label.to_string());
    out += ",\"char_start\":" + std::to_string(s.char_start);
    out += ",\"char_end\":" + std::to_string(s.char_end);
    out += ",\"t_start\":" + std::to_string(s.t_start);
    out += ",\"t_end\":" + std::to_string(s.t_end) + "}";
  }

  out += "],\"step_states\":[";
  for (std::size_t i = 0; i < t.step_states.size(); ++i) {
    if (i) out += ',';
    out += "{\"pooled_hidden\":[";
    const auto& layers = t.step_states[i].pooled_hidden;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (l) out += ',';
      out += '[';
      for (std::size_t k = 0; k < layers[l].size(); ++k) {
        if (k) out += ',';
        out += format_f32(layers[l][k]);
      }
      out += ']';
    }
    out += "]}";
  }

  out += "],\"prm_scores\":{";
  bool first = true;
  for (const auto& [name, scores] : t.prm_scores) {
    if (!first) out += ',';
    first = false;
    out += quote(name) + ":[";
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (i) out += ',';
      out += format_f64(scores[i]);
    }
    out += ']';
  }
  out += "}}";
  return out;
}

// Parses and validates one JSONL record. `source` prefixes error messages.
inline Trace parse_trace_line(std::string_view line, std::size_t line_no, const std::string& source = {}) {
  io::FieldReader r(line_no, source);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    r.fail("<record>", std::string("invalid JSON: ") + e.what());
  }
  r.require_object(j, "<record>");
  r.only_keys(j, {"id", "question", "response_text", "gold_answer", "tokens", "steps", "step_states", "prm_scores"}, "");

  Trace t;
  t.id = r.string(r.member(j, "id", ""), "id");
  t.question = r.string(r.member(j, "question", ""), "question");
  t.response_text = r.string(r.member(j, "response_text", ""), "response_text");
  if (auto it = j.find("gold_answer"); it != j.end() && !it->is_null()) {
    t.gold_answer = r.string(*it, "gold_answer");
  }

  const auto& tokens = r.member(j, "tokens", "");
  r.require_array(tokens, "tokens");
  t.tokens.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string p = "tokens[" + std::to_string(i) + "].";
    const auto& o = tokens[i];
    r.require_object(o, "tokens[" + std::to_string(i) + "]");
    r.only_keys(o, {"text", "char_start", "char_end", "top1_prob", "entropy"}, p);
    TokenScalars tok;
    tok.text = r.string(r.member(o, "text", p), p + "text");
    tok.char_start = r.index(r.member(o, "char_start", p), p + "char_start");
    tok.char_end = r.index(r.member(o, "char_end", p), p + "char_end");
    tok.top1_prob = r.f64(r.member(o, "top1_prob", p), p + "top1_prob");
    tok.entropy = r.f64(r.member(o, "entropy", p), p + "entropy");
    t.tokens.push_back(std::move(tok));
  }

  const auto& steps = r.member(j, "steps", "");
  r.require_array(steps, "steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string p = "steps[" + std::to_string(i) + "].";
    const auto& o = steps[i];
    r.require_object(o, "steps[" + std::to_string(i) + "]");
    r.only_keys(o, {"label", "char_start", "char_end", "t_start", "t_end"}, p);
    StepSpan s;
    try {
      s.label = SegmentLabel::parse(r.string(r.member(o, "label", p), p + "label"));
    } catch (const ParseError& e) {
      r.fail(p + "label", e.what());
    }
    s.char_start = r.index(r.member(o, "char_start", p), p + "char_start");
    s.char_end = r.index(r.member(o, "char_end", p), p + "char_end");
    s.t_start = r.index(r.member(o, "t_start", p), p + "t_start");
    s.t_end = r.index(r.member(o, "t_end", p), p + "t_end");
    t.steps.push_back(s);
  }

  if (auto it = j.find("step_states"); it != j.end() && !it->is_null()) {
    r.require_array(*it, "step_states");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "step_states[" + std::to_string(i) + "].";
      const auto& o = (*it)[i];
      r.require_object(o, "step_states[" + std::to_string(i) + "]");
      r.only_keys(o, {"pooled_hidden"}, p);
      const auto& layers = r.member(o, "pooled_hidden", p);
      r.require_array(layers, p + "pooled_hidden");
      StepStates st;
      st.pooled_hidden.reserve(layers.size());
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string lp = p + "pooled_hidden[" + std::to_string(l) + "]";
        r.require_array(layers[l], lp);
        std::vector<float> v;
        v.reserve(layers[l].size());
        for (std::size_t k = 0; k < layers[l].size(); ++k) {
          v.push_back(r.f32(layers[l][k], lp + "[" + std::to_string(k) + "]"));
        }
        st.pooled_hidden.push_back(std::move(v));
      }
      t.step_states.push_back(std::move(st));
    }
  }

  if (auto it = j.find("prm_scores"); it != j.end() && !it->is_null()) {
    r.require_object(*it, "prm_scores");
    for (auto p = it->begin(); p != it->end(); ++p) {
      const std::string path = "prm_scores." + p.key();
      r.require_array(*p, path);
      std::vector<double> scores;
      scores.reserve(p->size());
      for (std::size_t i = 0; i < p->size(); ++i) {
        scores.push_back(r.f64((*p)[i], path + "[" + std::to_string(i) + "]"));
      }
      t.prm_scores.emplace(p.key(), std::move(scores));
    }
  }

  try {
    validate(t);
  } catch (const ValidationError& e) {
    std::string where = source.empty() ? std::string() : source + ":";
    throw ValidationError(where + "line " + std::to_string(line_no) + ": " + e.what());
  }
  return t;
}

// Reads traces from a stream; blank lines are skipped.
inline std::vector<Trace> read_traces(std::istream& in, const std::string& source = {}) {
  std::vector<Trace> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out.push_back(parse_trace_line(line, line_no, source));
  }
  if (in.bad()) throw IoError("read failure on " + (source.empty() ? std::string("stream") : source));
  return out;
}

inline std::vector<Trace> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file '" + path.string() + "'");
  return read_traces(in, path.string());
}

inline void write_traces(const std::vector<Trace>& traces, std::ostream& out) {
  for (const auto& t : traces) {
    validate(t);
    out << to_jsonl_line(t) << '\n';
  }
}

inline void save_traces(const std::vector<Trace>& traces, const std::filesystem::path& path) {
  for (const auto& t : traces) validate(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_traces(traces, out);
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace automeco
