#pragma once

#include <string>
#include <vector>

#include "got/dataset.hpp"
#include "got/matrix.hpp"
#include "got/pipeline.hpp"

namespace got {

/// A generated subject-verb-object sentence with its known decomposition.
struct SvoFact {
  std::string sentence;  // "the fox likes the corn ."
  std::string x, y, z;   // "the fox", "likes", "the corn"
};

namespace detail_synth {

inline const std::vector<std::string>& animals() {
  static const std::vector<std::string> v = {"fox",  "owl",  "bear", "wolf", "crow",
                                             "deer", "hare", "lynx", "mole", "toad"};
  return v;
}

/// Inflected form first, root second; every inflected form must read as a
/// verb to the builtin extractor.
inline const std::vector<std::pair<std::string, std::string>>& verbs() {
  static const std::vector<std::pair<std::string, std::string>> v = {
      {"likes", "like"}, {"eats", "eat"},   {"sees", "see"},   {"wants", "want"},
      {"finds", "find"}, {"takes", "take"}, {"keeps", "keep"}, {"hunts", "hunt"}};
  return v;
}

inline const std::vector<std::string>& things() {
  static const std::vector<std::string> v = {"corn",  "fish",  "nuts",  "berries",
                                             "moss",  "seeds", "roots", "grubs"};
  return v;
}

/// k distinct indices in [0, n).
inline std::vector<int> pick_distinct(Rng& rng, int n, int k) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(pool[i], pool[rng.uniform_int(0, i)]);
  pool.resize(k);
  return pool;
}

}  // namespace detail_synth

inline SvoFact random_fact(Rng& rng) {
  const auto& a = detail_synth::animals();
  const auto& v = detail_synth::verbs();
  const auto& t = detail_synth::things();
  SvoFact f;
  f.x = "the " + a[rng.uniform_int(0, static_cast<int>(a.size()) - 1)];
  f.y = v[rng.uniform_int(0, static_cast<int>(v.size()) - 1)].first;
  f.z = "the " + t[rng.uniform_int(0, static_cast<int>(t.size()) - 1)];
  f.sentence = f.x + " " + f.y + " " + f.z + " .";
  return f;
}

/// Multiple-choice set over animal facts. Each sample states one fact per
/// animal; the question asks what the target animal's verb applies to, so the
/// correct choice is only linked to the question subject through its fact.
template <typename T = double>
std::vector<Sample<T>> make_synthetic_set(int count, uint64_t seed) {
  if (count < 1) throw ConfigError("synthetic set size must be positive");
  const auto& animals = detail_synth::animals();
  const auto& verbs = detail_synth::verbs();
  const auto& things = detail_synth::things();
  Rng rng(seed);
  std::vector<Sample<T>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const auto subj = detail_synth::pick_distinct(rng, static_cast<int>(animals.size()), 3);
    const auto obj = detail_synth::pick_distinct(rng, static_cast<int>(things.size()), 3);
    std::vector<std::string> facts;
    std::string root;
    for (int k = 0; k < 3; ++k) {
      const auto& verb = verbs[rng.uniform_int(0, static_cast<int>(verbs.size()) - 1)];
      if (k == 0) root = verb.second;
      facts.push_back("the " + animals[subj[k]] + " " + verb.first + " the " + things[obj[k]] +
                      " .");
    }
    Sample<T> s;
    s.id = "synth-" + std::to_string(i);
    s.question = "what does the " + animals[subj[0]] + " " + root + " .";

    std::vector<int> fact_order = detail_synth::pick_distinct(rng, 3, 3);
    for (int k : fact_order) {
      if (!s.context.empty()) s.context.push_back(' ');
      s.context += facts[k];
    }

    std::vector<int> choice_order = detail_synth::pick_distinct(rng, 3, 3);
    for (int k = 0; k < 3; ++k) {
      s.choices.push_back("the " + things[obj[choice_order[k]]]);
      if (choice_order[k] == 0) s.answer = k;
    }
    s.rationale = facts[0] + " so " + answer_sentence(s.answer);
    s.labels = {"SYN", i % 2 == 0 ? "EVEN" : "ODD"};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace got
