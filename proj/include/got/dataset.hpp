#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/io.hpp"
#include "got/matrix.hpp"
#include "got/text.hpp"

namespace got {

/// One multiple-choice question. `labels` carries per-class breakdown tags
/// (e.g. NAT/G1-6); a sample is counted in every tag it carries.
template <typename T = double>
struct Sample {
  std::string id;
  std::string question;
  std::string context;  // hint / passage text, droppable under truncation
  std::vector<std::string> choices;
  int answer = -1;  // gold choice index; -1 when unlabeled
  std::string rationale;
  std::string caption;
  std::optional<Matrix<T>> image;  // patches x vision_dim raw features
  std::vector<std::string> labels;
};

struct Prediction {
  std::string id;
  std::string rationale;
  std::string answer;
};

namespace detail_data {

inline std::vector<nlohmann::json> parse_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(lineno) + ": invalid json: " + e.what());
    }
  }
  return out;
}

inline std::string where(const std::string& path, size_t record) {
  return path + " record " + std::to_string(record + 1);
}

inline std::string require_string(const nlohmann::json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_string())
    throw SchemaError(ctx + ": missing string field \"" + key + "\"");
  return j[key].get<std::string>();
}

/// "A)4" or "B) 5 km" -> text with the letter tag stripped.
inline std::string strip_option_tag(const std::string& raw, int index, const std::string& ctx) {
  std::string s = raw;
  size_t p = s.find_first_not_of(" \t");
  if (p == std::string::npos) throw SchemaError(ctx + ": empty option " + std::to_string(index));
  const char expect = static_cast<char>('A' + index);
  if ((s[p] == expect || s[p] == expect + 32) && p + 1 < s.size() &&
      (s[p + 1] == ')' || s[p + 1] == '.' || s[p + 1] == ':')) {
    p += 2;
  }
  p = s.find_first_not_of(" \t", p);
  return p == std::string::npos ? std::string() : s.substr(p);
}

}  // namespace detail_data

/// Canonical split sizes used by the published benchmarks; loaders can be
/// asked to enforce them.
inline int expected_split_size(const std::string& dataset, const std::string& split) {
  static const std::map<std::string, std::map<std::string, int>> sizes = {
      {"aquarat", {{"train", 97467}, {"dev", 254}, {"test", 254}}},
      {"scienceqa", {{"train", 12726}, {"dev", 4241}, {"test", 4241}}},
  };
  auto d = sizes.find(dataset);
  if (d == sizes.end()) throw ConfigError("unknown dataset name: " + dataset);
  auto s = d->second.find(split);
  if (s == d->second.end()) throw ConfigError("unknown split name: " + split);
  return s->second;
}

/// AQUA-RAT records: {"question", "options": ["A)4", ...], "rationale",
/// "correct": "B"}.
template <typename T = double>
std::vector<Sample<T>> load_aquarat(const std::string& path, int expected_count = -1) {
  const auto records = detail_data::parse_jsonl(path);
  if (expected_count >= 0 && static_cast<int>(records.size()) != expected_count)
    throw SchemaError(path + ": has " + std::to_string(records.size()) + " records, expected " +
                      std::to_string(expected_count));
  std::vector<Sample<T>> out;
  out.reserve(records.size());
  for (size_t r = 0; r < records.size(); ++r) {
    const auto& j = records[r];
    const std::string ctx = detail_data::where(path, r);
    Sample<T> s;
    s.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                   : "aqua-" + std::to_string(r + 1);
    s.question = detail_data::require_string(j, "question", ctx);
    s.rationale = detail_data::require_string(j, "rationale", ctx);
    if (!j.contains("options") || !j["options"].is_array() || j["options"].empty())
      throw SchemaError(ctx + ": missing option array");
    for (size_t i = 0; i < j["options"].size(); ++i) {
      if (!j["options"][i].is_string()) throw SchemaError(ctx + ": option is not a string");
      s.choices.push_back(detail_data::strip_option_tag(j["options"][i].get<std::string>(),
                                                        static_cast<int>(i), ctx));
    }
    const std::string correct = detail_data::require_string(j, "correct", ctx);
    if (correct.size() != 1 || correct[0] < 'A' ||
        correct[0] >= static_cast<char>('A' + s.choices.size()))
      throw SchemaError(ctx + ": correct label \"" + correct + "\" does not name an option");
    s.answer = correct[0] - 'A';
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail_data {

inline std::string subject_tag(const std::string& subject, const std::string& ctx) {
  if (subject == "natural science") return "NAT";
  if (subject == "social science") return "SOC";
  if (subject == "language science") return "LAN";
  throw SchemaError(ctx + ": unknown subject \"" + subject + "\"");
}

inline std::string grade_tag(const std::string& grade, const std::string& ctx) {
  if (grade.rfind("grade", 0) != 0) throw SchemaError(ctx + ": unknown grade \"" + grade + "\"");
  const int g = std::stoi(grade.substr(5));
  if (g < 1 || g > 12) throw SchemaError(ctx + ": grade out of range \"" + grade + "\"");
  return g <= 6 ? "G1-6" : "G7-12";
}

}  // namespace detail_data

/// ScienceQA records: {"id", "question", "choices": [..], "answer": int,
/// "hint", "solution", "caption", "image_features", "subject", "grade"}.
/// Image features, when named, are tensor files under `features_dir`.
template <typename T = double>
std::vector<Sample<T>> load_scienceqa(const std::string& path, const std::string& features_dir = "",
                                      int expected_count = -1) {
  const auto records = detail_data::parse_jsonl(path);
  if (expected_count >= 0 && static_cast<int>(records.size()) != expected_count)
    throw SchemaError(path + ": has " + std::to_string(records.size()) + " records, expected " +
                      std::to_string(expected_count));
  std::vector<Sample<T>> out;
  out.reserve(records.size());
  for (size_t r = 0; r < records.size(); ++r) {
    const auto& j = records[r];
    const std::string ctx = detail_data::where(path, r);
    Sample<T> s;
    s.id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>()
                                                   : "sqa-" + std::to_string(r + 1);
    s.question = detail_data::require_string(j, "question", ctx);
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
      throw SchemaError(ctx + ": missing choice array");
    for (const auto& c : j["choices"]) {
      if (!c.is_string()) throw SchemaError(ctx + ": choice is not a string");
      s.choices.push_back(c.get<std::string>());
    }
    if (!j.contains("answer") || !j["answer"].is_number_integer())
      throw SchemaError(ctx + ": missing integer answer");
    s.answer = j["answer"].get<int>();
    if (s.answer < 0 || s.answer >= static_cast<int>(s.choices.size()))
      throw SchemaError(ctx + ": answer index " + std::to_string(s.answer) + " out of range");
    if (j.contains("hint") && j["hint"].is_string()) s.context = j["hint"].get<std::string>();
    if (j.contains("solution") && j["solution"].is_string())
      s.rationale = j["solution"].get<std::string>();
    if (j.contains("caption") && j["caption"].is_string())
      s.caption = j["caption"].get<std::string>();
    bool has_image = false;
    if (j.contains("image_features") && j["image_features"].is_string()) {
      has_image = true;
      if (!features_dir.empty())
        s.image = io::load_tensor<T>(features_dir + "/" + j["image_features"].get<std::string>());
    }
    s.labels.push_back(detail_data::subject_tag(detail_data::require_string(j, "subject", ctx), ctx));
    const bool has_text_ctx = !text::normalize(s.context).empty();
    if (has_text_ctx) s.labels.push_back("TXT");
    if (has_image) s.labels.push_back("IMG");
    if (!has_text_ctx && !has_image) s.labels.push_back("NO");
    s.labels.push_back(detail_data::grade_tag(detail_data::require_string(j, "grade", ctx), ctx));
    out.push_back(std::move(s));
  }
  return out;
}

/// Generic loader for files this toolchain writes itself (synthetic sets).
/// Fields mirror the ScienceQA shape minus the class metadata.
template <typename T = double>
std::vector<Sample<T>> load_simple(const std::string& path) {
  const auto records = detail_data::parse_jsonl(path);
  std::vector<Sample<T>> out;
  for (size_t r = 0; r < records.size(); ++r) {
    const auto& j = records[r];
    const std::string ctx = detail_data::where(path, r);
    Sample<T> s;
    s.id = detail_data::require_string(j, "id", ctx);
    s.question = detail_data::require_string(j, "question", ctx);
    if (!j.contains("choices") || !j["choices"].is_array())
      throw SchemaError(ctx + ": missing choice array");
    for (const auto& c : j["choices"]) s.choices.push_back(c.get<std::string>());
    if (j.contains("answer")) s.answer = j["answer"].get<int>();
    if (j.contains("context")) s.context = j["context"].get<std::string>();
    if (j.contains("rationale")) s.rationale = j["rationale"].get<std::string>();
    if (j.contains("caption")) s.caption = j["caption"].get<std::string>();
    if (j.contains("labels"))
      for (const auto& l : j["labels"]) s.labels.push_back(l.get<std::string>());
    out.push_back(std::move(s));
  }
  return out;
}

template <typename T>
nlohmann::json sample_to_json(const Sample<T>& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["question"] = s.question;
  j["choices"] = s.choices;
  j["answer"] = s.answer;
  if (!s.context.empty()) j["context"] = s.context;
  if (!s.rationale.empty()) j["rationale"] = s.rationale;
  if (!s.caption.empty()) j["caption"] = s.caption;
  if (!s.labels.empty()) j["labels"] = s.labels;
  return j;
}

template <typename T>
void save_samples(const std::string& path, const std::vector<Sample<T>>& samples) {
  std::string buf;
  for (const auto& s : samples) buf += sample_to_json(s).dump() + "\n";
  io::write_file(path, buf);
}

/// Predictions are JSONL rows {"id", "rationale", "answer"}.
inline std::vector<Prediction> load_predictions(const std::string& path) {
  const auto records = detail_data::parse_jsonl(path);
  std::vector<Prediction> out;
  for (size_t r = 0; r < records.size(); ++r) {
    const auto& j = records[r];
    const std::string ctx = detail_data::where(path, r);
    out.push_back(Prediction{detail_data::require_string(j, "id", ctx),
                             detail_data::require_string(j, "rationale", ctx),
                             detail_data::require_string(j, "answer", ctx)});
  }
  return out;
}

inline void save_predictions(const std::string& path, const std::vector<Prediction>& preds) {
  std::string buf;
  for (const auto& p : preds) {
    nlohmann::json j;
    j["id"] = p.id;
    j["rationale"] = p.rationale;
    j["answer"] = p.answer;
    buf += j.dump() + "\n";
  }
  io::write_file(path, buf);
}

}  // namespace got
