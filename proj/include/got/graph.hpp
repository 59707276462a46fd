#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "got/error.hpp"
#include "got/extract.hpp"
#include "got/matrix.hpp"

namespace got {

/// Pre-merge graph: nodes in first-occurrence order, undirected deduped
/// edges, no self-edges.
struct RawGraph {
  std::vector<std::string> nodes;
  std::vector<std::pair<int, int>> edges;  // first < second

  int index_of(const std::string& span) const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i] == span) return static_cast<int>(i);
    return -1;
  }
};

/// Post-merge graph with a symmetric 0/1 adjacency matrix, zero diagonal.
/// Self-loops are the encoder's business, never stored here.
struct ThoughtGraph {
  std::vector<std::string> nodes;
  Matrix<uint8_t> adj;

  int size() const { return static_cast<int>(nodes.size()); }
  bool empty() const { return nodes.empty(); }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size(); ++i)
      for (int j = i + 1; j < size(); ++j)
        if (adj(i, j)) out.emplace_back(i, j);
    return out;
  }
};

inline RawGraph build_raw_graph(const std::vector<Triplet>& triplets) {
  RawGraph g;
  std::unordered_map<std::string, int> index;
  std::set<std::pair<int, int>> seen;
  auto intern = [&](const std::string& span) {
    auto it = index.find(span);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back(span);
    index.emplace(span, id);
    return id;
  };
  auto link = [&](int a, int b) {
    if (a == b) return;
    const auto e = std::minmax(a, b);
    if (seen.insert({e.first, e.second}).second) g.edges.push_back({e.first, e.second});
  };
  for (const auto& t : triplets) {
    const int x = intern(t.x);
    const int y = intern(t.y);
    const int z = intern(t.z);
    link(x, y);
    link(y, z);
  }
  return g;
}

inline nlohmann::json graph_to_json(const ThoughtGraph& g) {
  nlohmann::json j;
  j["nodes"] = g.nodes;
  j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : g.edges()) j["edges"].push_back({a, b});
  return j;
}

inline ThoughtGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges") ||
      !j["nodes"].is_array() || !j["edges"].is_array())
    throw SchemaError("graph json: expected {\"nodes\": [...], \"edges\": [...]}");
  ThoughtGraph g;
  for (const auto& n : j["nodes"]) {
    if (!n.is_string()) throw SchemaError("graph json: node entries must be strings");
    g.nodes.push_back(n.get<std::string>());
  }
  const int n = g.size();
  g.adj = Matrix<uint8_t>(n, n);
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw SchemaError("graph json: edge entries must be [i, j] integer pairs");
    const int a = e[0].get<int>();
    const int b = e[1].get<int>();
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw SchemaError("graph json: edge [" + std::to_string(a) + "," + std::to_string(b) +
                        "] references a missing node");
    if (a == b) throw SchemaError("graph json: self-edges are not allowed");
    g.adj(a, b) = 1;
    g.adj(b, a) = 1;
  }
  return g;
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

inline std::string graph_to_dot(const ThoughtGraph& g) {
  std::string out = "graph thought_graph {\n";
  for (int i = 0; i < g.size(); ++i)
    out += "  n" + std::to_string(i) + " [label=\"" + dot_escape(g.nodes[i]) + "\"];\n";
  for (const auto& [a, b] : g.edges())
    out += "  n" + std::to_string(a) + " -- n" + std::to_string(b) + ";\n";
  out += "}\n";
  return out;
}

}  // namespace got
