#pragma once

#include <optional>
#include <string>

#include "got/coref.hpp"
#include "got/error.hpp"
#include "got/extract.hpp"
#include "got/graph.hpp"
#include "got/text.hpp"

namespace got {

enum class Stage { rationale, answer };

inline const char* stage_name(Stage s) { return s == Stage::rationale ? "rationale" : "answer"; }

struct EccConfig {
  int max_nodes = 150;
  double overlap_threshold = 0.5;
};

namespace detail_ecc {

/// Appends a segment, guaranteeing a sentence boundary before it so spans
/// never straddle two segments.
inline void append_segment(std::string& acc, const std::string& segment) {
  if (segment.empty()) return;
  if (!acc.empty()) {
    const char last = acc.back();
    if (last != '.' && last != '?' && last != '!') acc += " .";
    acc += ' ';
  }
  acc += segment;
}

}  // namespace detail_ecc

/// End-to-end thought-graph construction: assemble the stage input text,
/// extract triplets, build the raw graph, cluster coreferent nodes, merge.
inline ThoughtGraph construct_got(const std::string& input_text, Stage stage,
                                  const std::optional<std::string>& predicted_rationale = {},
                                  const std::optional<std::string>& caption = {},
                                  const EccConfig& config = {}) {
  if (stage == Stage::answer && !predicted_rationale.has_value())
    throw ConfigError("construct_got: answer stage requires a predicted rationale");

  std::string assembled;
  detail_ecc::append_segment(assembled, input_text);
  if (caption) detail_ecc::append_segment(assembled, *caption);
  if (stage == Stage::answer) detail_ecc::append_segment(assembled, *predicted_rationale);

  const std::string normalized = text::normalize(assembled);
  const auto triplets = extract_triplets(normalized);
  const RawGraph raw = build_raw_graph(triplets);
  const auto clusters =
      cluster_coreferences(raw, CorefMode::builtin, nullptr, config.overlap_threshold);
  return resolve_and_merge(raw, clusters, config.max_nodes);
}

}  // namespace got
