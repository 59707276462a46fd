#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>
#include <vector>

namespace got::text {

/// Lowercase, collapse whitespace runs to single spaces, trim ends.
/// All span offsets elsewhere refer to this normalized form.
inline std::string normalize(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    const unsigned char u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

struct Token {
  std::string text;  // exact substring, may carry adjacent punctuation
  int begin = 0;     // char offset into the normalized string
  int end = 0;       // one past the last char
};

inline std::vector<Token> tokenize(const std::string& s, int offset_base = 0) {
  std::vector<Token> out;
  int i = 0;
  const int n = static_cast<int>(s.size());
  while (i < n) {
    while (i < n && s[i] == ' ') ++i;
    if (i >= n) break;
    int j = i;
    while (j < n && s[j] != ' ') ++j;
    out.push_back(Token{s.substr(i, j - i), offset_base + i, offset_base + j});
    i = j;
  }
  return out;
}

inline bool is_punct_char(char c) {
  static const std::string kPunct = ".,;:?!\"'()[]{}";
  return kPunct.find(c) != std::string::npos;
}

/// Token stripped of leading/trailing punctuation; the form lexicons match on.
inline std::string core(const std::string& token) {
  size_t b = 0, e = token.size();
  while (b < e && is_punct_char(token[b])) ++b;
  while (e > b && is_punct_char(token[e - 1])) --e;
  return token.substr(b, e - b);
}

/// Char range [begin, end) of `s` with outer punctuation and spaces shaved off.
inline std::pair<int, int> trim_span(const std::string& s, int begin, int end) {
  while (begin < end && (s[begin] == ' ' || is_punct_char(s[begin]))) ++begin;
  while (end > begin && (s[end - 1] == ' ' || is_punct_char(s[end - 1]))) --end;
  return {begin, end};
}

namespace lex {

inline const std::unordered_set<std::string>& aux() {
  static const std::unordered_set<std::string> s{
      "is",  "are", "was",   "were",  "am",    "be",     "been", "being", "has",
      "have", "had", "do",   "does",  "did",   "can",    "could", "will", "would",
      "shall", "should", "may", "might", "must"};
  return s;
}

inline const std::unordered_set<std::string>& prepositions() {
  static const std::unordered_set<std::string> s{
      "of",     "in",      "on",      "at",      "by",      "for",    "with",
      "from",   "to",      "into",    "onto",    "over",    "under",  "about",
      "as",     "through", "during",  "between", "among",   "against", "without",
      "within", "along",   "across",  "behind",  "beyond",  "near",   "since",
      "until",  "upon",    "toward",  "towards", "off",     "around"};
  return s;
}

inline const std::unordered_set<std::string>& pronouns() {
  static const std::unordered_set<std::string> s{
      "it",   "he",    "she",  "they",  "them",  "him",  "her",   "its",  "his",
      "hers", "theirs", "we",  "us",    "i",     "you",  "me",    "mine", "yours",
      "ours", "this",  "that", "these", "those"};
  return s;
}

inline const std::unordered_set<std::string>& determiners() {
  static const std::unordered_set<std::string> s{
      "the",  "a",    "an",      "some", "any",  "each",    "every", "no",
      "another", "other", "both", "either", "neither", "all", "most", "many",
      "much", "few",  "several", "such"};
  return s;
}

}  // namespace lex

inline const std::unordered_set<std::string>& irregular_participles() {
  static const std::unordered_set<std::string> s{
      "made",   "done",    "given",  "taken",   "known",   "seen",    "found",
      "kept",   "built",   "held",   "shown",   "grown",   "worn",    "born",
      "felt",   "left",    "lost",   "meant",   "brought", "thought", "caught",
      "bought", "sold",    "told",   "said",    "gone",    "become",  "begun",
      "written", "driven", "eaten",  "fallen",  "chosen",  "drawn",   "thrown",
      "spoken", "broken",  "frozen", "hidden",  "forgotten", "understood"};
  return s;
}

inline bool is_aux(const std::string& w) { return lex::aux().count(w) > 0; }
inline bool is_irregular_participle(const std::string& w) {
  return irregular_participles().count(w) > 0;
}
inline bool is_preposition(const std::string& w) { return lex::prepositions().count(w) > 0; }
inline bool is_pronoun(const std::string& w) { return lex::pronouns().count(w) > 0; }
inline bool is_determiner(const std::string& w) { return lex::determiners().count(w) > 0; }

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Morphological verb guess for inflected forms; auxiliaries are handled by
/// is_aux separately. Exclusion lists block the most common false positives.
inline bool is_suffix_verb(const std::string& w) {
  static const std::unordered_set<std::string> ing_block{
      "thing",   "nothing",   "something", "anything", "everything", "spring",
      "string",  "during",    "morning",   "evening",  "king",       "ring",
      "wing",    "ceiling",   "building"};
  static const std::unordered_set<std::string> ed_block{
      "red", "bed", "wed", "shed", "sled", "hundred", "sacred", "naked", "wicked"};
  static const std::unordered_set<std::string> s_block{
      "yes", "always", "perhaps", "news", "species", "physics", "mathematics",
      "politics", "plus", "minus", "times"};
  if (ends_with(w, "ing")) return w.size() >= 5 && ing_block.count(w) == 0;
  if (ends_with(w, "eed")) return false;
  if (ends_with(w, "ed")) return w.size() >= 4 && ed_block.count(w) == 0;
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is") ||
      ends_with(w, "as") || ends_with(w, "os"))
    return false;
  if (ends_with(w, "s"))
    return w.size() >= 3 && s_block.count(w) == 0 && !is_pronoun(w) && !is_determiner(w) &&
           !is_preposition(w);
  return false;
}

/// Extends a relation run past the verb: auxiliaries, prepositions,
/// inflected forms, and irregular participles ("is made of").
inline bool is_relation_word(const std::string& w) {
  return is_aux(w) || is_preposition(w) || is_suffix_verb(w) || is_irregular_participle(w);
}

/// Sentence ranges [begin, end) over the normalized string, split after
/// terminal punctuation. The terminal chars stay inside the range.
inline std::vector<std::pair<int, int>> sentence_ranges(const std::string& s) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(s.size());
  int start = 0;
  for (int i = 0; i < n; ++i) {
    if (s[i] == '.' || s[i] == '?' || s[i] == '!') {
      int end = i + 1;
      while (end < n && (s[end] == '.' || s[end] == '?' || s[end] == '!')) ++end;
      out.emplace_back(start, end);
      i = end - 1;
      start = end;
    }
  }
  if (start < n) {
    bool only_space = true;
    for (int i = start; i < n; ++i) only_space &= s[i] == ' ';
    if (!only_space) out.emplace_back(start, n);
  }
  return out;
}

}  // namespace got::text
