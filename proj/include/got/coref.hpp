#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/graph.hpp"
#include "got/text.hpp"

namespace got {

struct CoreferenceCluster {
  std::vector<std::string> members;  // node occurrence order
  std::string representative;
};

enum class CorefMode { builtin, imported };

namespace detail_coref {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

inline std::unordered_set<std::string> token_set(const std::string& span) {
  std::unordered_set<std::string> out;
  for (const auto& tok : text::tokenize(span)) {
    const std::string w = text::core(tok.text);
    if (!w.empty()) out.insert(w);
  }
  return out;
}

inline double jaccard(const std::unordered_set<std::string>& a,
                      const std::unordered_set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& w : a) inter += b.count(w);
  const size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

inline bool is_pronoun_span(const std::string& span) {
  const auto toks = text::tokenize(span);
  return toks.size() == 1 && text::is_pronoun(text::core(toks[0].text));
}

}  // namespace detail_coref

/// Groups nodes that refer to the same thing: equal spans, token overlap at
/// or above `overlap_threshold` (Jaccard), or a pronoun resolved to the
/// nearest preceding non-pronoun node. Representative = longest member span,
/// earliest occurrence on ties.
inline std::vector<CoreferenceCluster> cluster_coreferences(
    const RawGraph& graph, CorefMode mode = CorefMode::builtin,
    const nlohmann::json* imported_payload = nullptr, double overlap_threshold = 0.5) {
  const int n = static_cast<int>(graph.nodes.size());

  if (mode == CorefMode::imported) {
    if (imported_payload == nullptr)
      throw SchemaError("cluster_coreferences: imported mode requires a payload");
    const auto& payload = *imported_payload;
    if (!payload.is_array()) throw SchemaError("cluster payload: expected a JSON array");
    std::vector<CoreferenceCluster> out;
    std::unordered_set<std::string> claimed;
    for (size_t i = 0; i < payload.size(); ++i) {
      const auto& rec = payload[i];
      const std::string where = "cluster record " + std::to_string(i);
      if (!rec.is_object() || !rec.contains("members") || !rec.contains("representative") ||
          !rec["members"].is_array() || !rec["representative"].is_string())
        throw SchemaError(where + ": expected {\"members\": [str], \"representative\": str}");
      CoreferenceCluster c;
      for (const auto& m : rec["members"]) {
        if (!m.is_string()) throw SchemaError(where + ": member entries must be strings");
        const std::string span = text::normalize(m.get<std::string>());
        if (graph.index_of(span) < 0)
          throw UnknownReferenceError(where + ": member \"" + span + "\" is not a graph node");
        if (!claimed.insert(span).second)
          throw SchemaError(where + ": member \"" + span + "\" appears in two clusters");
        c.members.push_back(span);
      }
      if (c.members.size() < 2) throw SchemaError(where + ": clusters need at least 2 members");
      c.representative = text::normalize(rec["representative"].get<std::string>());
      if (std::find(c.members.begin(), c.members.end(), c.representative) == c.members.end())
        throw SchemaError(where + ": representative must be one of the members");
      out.push_back(std::move(c));
    }
    return out;
  }

  detail_coref::UnionFind uf(n);
  std::vector<std::unordered_set<std::string>> tokens(n);
  for (int i = 0; i < n; ++i) tokens[i] = detail_coref::token_set(graph.nodes[i]);

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (graph.nodes[i] == graph.nodes[j] ||
          detail_coref::jaccard(tokens[i], tokens[j]) >= overlap_threshold)
        uf.unite(j, i);
    }
  for (int i = 0; i < n; ++i) {
    if (!detail_coref::is_pronoun_span(graph.nodes[i])) continue;
    for (int j = i - 1; j >= 0; --j) {
      if (!detail_coref::is_pronoun_span(graph.nodes[j])) {
        uf.unite(i, j);
        break;
      }
    }
  }

  std::unordered_map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);

  std::vector<CoreferenceCluster> out;
  std::vector<int> roots;
  for (auto& [root, ids] : groups)
    if (ids.size() >= 2) roots.push_back(root);
  std::sort(roots.begin(), roots.end(),
            [&](int a, int b) { return groups[a].front() < groups[b].front(); });
  for (int root : roots) {
    auto& ids = groups[root];
    std::sort(ids.begin(), ids.end());
    CoreferenceCluster c;
    int best = ids[0];
    for (int id : ids) {
      c.members.push_back(graph.nodes[id]);
      if (graph.nodes[id].size() > graph.nodes[best].size()) best = id;
    }
    c.representative = graph.nodes[best];
    out.push_back(std::move(c));
  }
  return out;
}

/// Replaces every clustered node by its representative, reattaches edges,
/// drops self-loops born from merging, and enforces the node cap by keeping
/// the earliest `max_nodes` nodes.
inline ThoughtGraph resolve_and_merge(const RawGraph& graph,
                                      const std::vector<CoreferenceCluster>& clusters,
                                      int max_nodes) {
  if (max_nodes < 0) throw ConfigError("resolve_and_merge: max_nodes must be non-negative");
  std::unordered_map<std::string, std::string> rep;
  for (const auto& c : clusters)
    for (const auto& m : c.members) rep[m] = c.representative;

  ThoughtGraph g;
  std::unordered_map<std::string, int> index;
  std::vector<int> old_to_new(graph.nodes.size(), -1);
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    auto it = rep.find(graph.nodes[i]);
    const std::string& target = it == rep.end() ? graph.nodes[i] : it->second;
    auto found = index.find(target);
    if (found != index.end()) {
      old_to_new[i] = found->second;
      continue;
    }
    if (static_cast<int>(g.nodes.size()) >= max_nodes) continue;  // capped, stays -1
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back(target);
    index.emplace(target, id);
    old_to_new[i] = id;
  }

  const int n = g.size();
  g.adj = Matrix<uint8_t>(n, n);
  for (const auto& [a, b] : graph.edges) {
    const int na = old_to_new[a];
    const int nb = old_to_new[b];
    if (na < 0 || nb < 0 || na == nb) continue;
    g.adj(na, nb) = 1;
    g.adj(nb, na) = 1;
  }
  return g;
}

}  // namespace got
