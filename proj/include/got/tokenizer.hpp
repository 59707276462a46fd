#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/text.hpp"

namespace got {

/// Word-level vocabulary with fixed special tokens at the front.
/// Words are whitespace-separated pieces of normalized text; unknown words map
/// to <unk>.
class Tokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNodeOpen = 4;   // <s>
  static constexpr int kNodeClose = 5;  // </s>

  Tokenizer() {
    for (const char* s : {"<pad>", "<unk>", "<bos>", "<eos>", "<s>", "</s>"}) add_word(s);
  }

  /// Builds a vocabulary from every whitespace token in the given corpus
  /// lines, first occurrence order.
  static Tokenizer from_corpus(const std::vector<std::string>& lines) {
    Tokenizer tok;
    for (const auto& line : lines) {
      std::istringstream ss(text::normalize(line));
      std::string w;
      while (ss >> w) tok.add_word(w);
    }
    return tok;
  }

  int add_word(const std::string& w) {
    auto it = index_.find(w);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(words_.size());
    index_[w] = id;
    words_.push_back(w);
    return id;
  }

  int id_of(const std::string& w) const {
    auto it = index_.find(w);
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& word(int id) const {
    if (id < 0 || id >= static_cast<int>(words_.size()))
      throw UnknownReferenceError("token id out of range: " + std::to_string(id));
    return words_[id];
  }

  int size() const { return static_cast<int>(words_.size()); }

  /// Normalizes and splits on whitespace; no <bos>/<eos> framing here.
  std::vector<int> encode(const std::string& raw) const {
    std::vector<int> ids;
    std::istringstream ss(text::normalize(raw));
    std::string w;
    while (ss >> w) ids.push_back(id_of(w));
    return ids;
  }

  /// Joins words with single spaces, skipping specials.
  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
      if (id < kNodeClose + 1) continue;
      if (!out.empty()) out.push_back(' ');
      out += word(id);
    }
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& w : words_) j.push_back(w);
    return j;
  }

  static Tokenizer from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() < 6) throw SchemaError("tokenizer json: expected word array with specials");
    Tokenizer tok;
    for (size_t i = 6; i < j.size(); ++i) tok.add_word(j[i].get<std::string>());
    return tok;
  }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> index_;
};

}  // namespace got
