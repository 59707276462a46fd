#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/text.hpp"

namespace got {

/// Deductive unit (t_x, t_y, t_z). Spans are substrings of the normalized
/// source text; sentence is the ordinal of the sentence they came from.
struct Triplet {
  std::string x;
  std::string y;
  std::string z;
  int sentence = 0;

  bool operator==(const Triplet&) const = default;
};

enum class ExtractMode { builtin, imported };

namespace detail_extract {

using text::Token;

inline bool verb_trigger(const std::string& w) {
  return text::is_aux(w) || text::is_suffix_verb(w);
}

inline bool has_verb_past_first(const std::vector<Token>& toks, size_t from, size_t to) {
  for (size_t i = from + 1; i < to; ++i)
    if (verb_trigger(text::core(toks[i].text))) return true;
  return false;
}

/// First plausible verb position in [1, n): an auxiliary or inflected form
/// not directly preceded by a determiner (which signals a noun phrase).
inline int find_verb(const std::vector<Token>& toks) {
  for (size_t v = 1; v < toks.size(); ++v) {
    const std::string w = text::core(toks[v].text);
    if (w.empty() || !verb_trigger(w)) continue;
    if (text::is_determiner(text::core(toks[v - 1].text))) continue;
    return static_cast<int>(v);
  }
  return -1;
}

inline std::optional<Triplet> clause_triplet(const std::string& src,
                                             const std::vector<Token>& toks, int sentence) {
  if (toks.size() < 3) return std::nullopt;
  const int v = find_verb(toks);
  if (v < 0 || v + 1 >= static_cast<int>(toks.size())) return std::nullopt;

  // Relation run: the verb plus following auxiliaries, prepositions, and
  // inflected forms, always leaving at least one object token.
  int r_end = v + 1;
  while (r_end + 1 < static_cast<int>(toks.size()) &&
         text::is_relation_word(text::core(toks[r_end].text)))
    ++r_end;

  auto span = [&src](int b, int e) -> std::optional<std::string> {
    auto [tb, te] = text::trim_span(src, b, e);
    if (tb >= te) return std::nullopt;
    return src.substr(tb, te - tb);
  };
  auto sx = span(toks[0].begin, toks[v - 1].end);
  auto sy = span(toks[v].begin, toks[r_end - 1].end);
  auto sz = span(toks[r_end].begin, toks.back().end);
  if (!sx || !sy || !sz) return std::nullopt;
  return Triplet{*sx, *sy, *sz, sentence};
}

/// Splits on "and" / "," / ";" only when both sides still carry a verb, so
/// compound sentences yield one triplet per clause.
inline std::vector<std::vector<Token>> split_clauses(const std::vector<Token>& toks) {
  std::vector<std::vector<Token>> clauses;
  std::vector<Token> current;
  for (size_t i = 0; i < toks.size(); ++i) {
    const std::string w = text::core(toks[i].text);
    const bool and_boundary = w == "and";
    const bool punct_boundary =
        !toks[i].text.empty() &&
        (toks[i].text.back() == ',' || toks[i].text.back() == ';');
    if (!and_boundary) current.push_back(toks[i]);
    if ((and_boundary || punct_boundary) && current.size() >= 2 &&
        has_verb_past_first(current, 0, current.size()) &&
        has_verb_past_first(toks, i, toks.size())) {
      clauses.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) clauses.push_back(std::move(current));
  return clauses;
}

inline std::vector<Triplet> extract_builtin(const std::string& src) {
  std::vector<Triplet> out;
  const auto sentences = text::sentence_ranges(src);
  for (size_t s = 0; s < sentences.size(); ++s) {
    const auto [b, e] = sentences[s];
    const auto toks = text::tokenize(src.substr(b, e - b), b);
    for (const auto& clause : split_clauses(toks)) {
      if (auto trip = clause_triplet(src, clause, static_cast<int>(s))) out.push_back(*trip);
    }
  }
  return out;
}

inline std::vector<Triplet> extract_imported(const std::string& src, const nlohmann::json& payload) {
  if (!payload.is_array()) throw SchemaError("triplet payload: expected a JSON array");
  std::vector<Triplet> out;
  for (size_t i = 0; i < payload.size(); ++i) {
    const auto& rec = payload[i];
    const std::string where = "triplet record " + std::to_string(i);
    if (!rec.is_object()) throw SchemaError(where + ": expected an object");
    for (const char* key : {"x", "y", "z"}) {
      if (!rec.contains(key) || !rec[key].is_string())
        throw SchemaError(where + ": missing or non-string field \"" + key + "\"");
    }
    if (!rec.contains("sentence") || !rec["sentence"].is_number_integer() ||
        rec["sentence"].get<int>() < 0)
      throw SchemaError(where + ": missing or invalid field \"sentence\"");
    Triplet t;
    t.x = text::normalize(rec["x"].get<std::string>());
    t.y = text::normalize(rec["y"].get<std::string>());
    t.z = text::normalize(rec["z"].get<std::string>());
    t.sentence = rec["sentence"].get<int>();
    for (const auto* span : {&t.x, &t.y, &t.z}) {
      if (span->empty()) throw SchemaError(where + ": empty span after normalization");
      if (src.find(*span) == std::string::npos)
        throw SchemaError(where + ": span \"" + *span + "\" does not occur in the input text");
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail_extract

/// Extracts deductive triplets from normalized text. Deterministic; spans in
/// the result always occur verbatim in `normalized_text`.
inline std::vector<Triplet> extract_triplets(const std::string& normalized_text,
                                             ExtractMode mode = ExtractMode::builtin,
                                             const nlohmann::json* imported_payload = nullptr) {
  if (normalized_text.empty())
    throw EmptyInputError("extract_triplets: input text is empty");
  if (mode == ExtractMode::imported) {
    if (imported_payload == nullptr)
      throw SchemaError("extract_triplets: imported mode requires a payload");
    return detail_extract::extract_imported(normalized_text, *imported_payload);
  }
  return detail_extract::extract_builtin(normalized_text);
}

}  // namespace got
