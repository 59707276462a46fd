// Command-line surface for the two-stage graph-of-thought toolkit.
//
// Verbs: extract (text -> thought graph), encode / attn (seeded standalone
// graph encoder runs), gradcheck (finite-difference battery), synth
// (templated multiple-choice set), train / infer (two-stage toy model),
// eval (accuracy + overlap metrics). Every failed check exits nonzero.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "got/config.hpp"
#include "got/graph.hpp"
#include "got/io.hpp"
#include "got/metrics.hpp"
#include "got/pipeline.hpp"
#include "got/synth.hpp"
#include "got/verify.hpp"

namespace {

got::Stage parse_stage(const std::string& s) {
  if (s == "rationale") return got::Stage::rationale;
  if (s == "answer") return got::Stage::answer;
  throw got::ConfigError("stage: expected rationale|answer, got \"" + s + "\"");
}

std::vector<got::Sample<double>> load_dataset(const std::string& kind, const std::string& path,
                                              const std::string& features, int expect) {
  if (kind == "simple") return got::load_simple<double>(path);
  if (kind == "aquarat") return got::load_aquarat<double>(path, expect);
  if (kind == "scienceqa") return got::load_scienceqa<double>(path, features, expect);
  throw got::ConfigError("dataset: expected simple|aquarat|scienceqa, got \"" + kind + "\"");
}

got::ThoughtGraph load_graph(const std::string& path) {
  return got::graph_from_json(nlohmann::json::parse(got::io::read_file(path)));
}

int run_extract(const std::string& input, const std::string& triplets, const std::string& coref,
                const std::string& out, int max_nodes, double overlap) {
  const std::string normalized = got::text::normalize(got::io::read_file(input));
  std::optional<nlohmann::json> trip_payload;
  if (!triplets.empty()) trip_payload = nlohmann::json::parse(got::io::read_file(triplets));
  std::optional<nlohmann::json> coref_payload;
  if (!coref.empty()) coref_payload = nlohmann::json::parse(got::io::read_file(coref));

  const auto trips = got::extract_triplets(
      normalized, trip_payload ? got::ExtractMode::imported : got::ExtractMode::builtin,
      trip_payload ? &*trip_payload : nullptr);
  const got::RawGraph raw = got::build_raw_graph(trips);
  const auto clusters = got::cluster_coreferences(
      raw, coref_payload ? got::CorefMode::imported : got::CorefMode::builtin,
      coref_payload ? &*coref_payload : nullptr, overlap);
  const got::ThoughtGraph g = got::resolve_and_merge(raw, clusters, max_nodes);

  if (out.ends_with(".dot"))
    got::io::write_file(out, got::graph_to_dot(g));
  else
    got::io::write_file(out, got::graph_to_json(g).dump(2) + "\n");
  std::cout << "extract: " << g.size() << " nodes, " << g.edges().size() << " edges -> " << out
            << "\n";
  return 0;
}

got::PipelineConfig config_from_file(const std::string& path) {
  got::PipelineConfig cfg;
  if (!path.empty()) return got::load_config(path);
  got::validate_config(cfg);
  return cfg;
}

int run_encode(const std::string& graph, const std::string& config, uint64_t seed,
               const std::string& out, bool attention) {
  const got::PipelineConfig cfg = config_from_file(config);
  const got::ThoughtGraph g = load_graph(graph);
  const auto enc = got::encode_graph_standalone<double>(g, cfg, seed);
  if (attention) {
    got::io::write_file(out, got::attention_report_json(g.nodes, enc.attention).dump(2) + "\n");
    std::cout << "attn: " << enc.attention.size() << " attention layers over " << g.size()
              << " nodes -> " << out << "\n";
  } else {
    got::io::save_tensor(out, enc.features);
    std::cout << "encode: " << enc.features.rows() << " x " << enc.features.cols()
              << " node features -> " << out << "\n";
  }
  return 0;
}

int run_gradcheck() {
  const auto battery = got::verify::gradient_battery();
  int failed = 0;
  for (const auto& item : battery) {
    const bool ok = item.pass();
    if (!ok) ++failed;
    std::cout << "gradcheck: " << item.name << ": max rel err " << item.report.max_err << " "
              << (ok ? "[pass]" : "[FAIL]") << "\n";
  }
  std::cout << "gradcheck: " << (battery.size() - failed) << "/" << battery.size()
            << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

int run_synth(const std::string& out, int count, uint64_t seed) {
  const auto samples = got::make_synthetic_set<double>(count, seed);
  got::save_samples(out, samples);
  std::cout << "synth: " << samples.size() << " samples -> " << out << "\n";
  return 0;
}

int run_train(got::PipelineConfig cfg, const std::string& dataset, const std::string& data,
              const std::string& features, int expect, int limit, got::Stage stage,
              const std::string& out) {
  auto samples = load_dataset(dataset, data, features, expect);
  if (limit > 0 && static_cast<int>(samples.size()) > limit) samples.resize(limit);
  auto m = got::init_model<double>(
      cfg.model, got::Tokenizer::from_corpus(got::tokenizer_corpus(samples)), cfg.seed);
  const auto report = got::train_stage(m, samples, stage, cfg);
  got::save_model(out, m);
  for (size_t e = 0; e < report.epoch_mean_loss.size(); ++e)
    std::cout << "train: epoch " << (e + 1) << " mean loss " << report.epoch_mean_loss[e] << "\n";
  std::cout << "train: " << samples.size() << " samples, stage " << got::stage_name(stage)
            << " -> " << out << "\n";
  return 0;
}

int run_infer(got::PipelineConfig cfg, const std::string& dataset, const std::string& data,
              const std::string& features, int expect, int limit, got::Stage stage,
              const std::string& model, const std::string& rationales, const std::string& out,
              const std::string& attn_out) {
  auto samples = load_dataset(dataset, data, features, expect);
  if (limit > 0 && static_cast<int>(samples.size()) > limit) samples.resize(limit);
  const auto m = got::load_model<double>(model);

  std::map<std::string, std::string> rat;
  if (!rationales.empty())
    for (const auto& p : got::load_predictions(rationales)) rat[p.id] = p.rationale;

  nlohmann::json attention;
  const auto preds =
      got::infer_stage(m, cfg, samples, stage, rationales.empty() ? nullptr : &rat,
                       attn_out.empty() ? nullptr : &attention);
  got::save_predictions(out, preds);
  if (!attn_out.empty()) got::io::write_file(attn_out, attention.dump(2) + "\n");
  std::cout << "infer: " << preds.size() << " predictions, stage " << got::stage_name(stage)
            << " -> " << out << "\n";
  return 0;
}

int run_eval(const std::string& dataset, const std::string& data, const std::string& features,
             int expect, const std::string& pred, const std::string& out) {
  const auto samples = load_dataset(dataset, data, features, expect);
  const auto report = got::evaluate(samples, got::load_predictions(pred));
  const std::string rendered = report.to_json().dump(2);
  std::cout << rendered << "\n";
  if (!out.empty()) got::io::write_file(out, rendered + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage graph-of-thought reasoning toolkit"};
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract", "Build a thought graph from a text file");
  std::string ex_input, ex_triplets, ex_coref, ex_out;
  int ex_max_nodes = 150;
  double ex_overlap = 0.5;
  extract->add_option("--input", ex_input, "Input text file")->required();
  extract->add_option("--triplets", ex_triplets, "Triplet JSON to import instead of extracting");
  extract->add_option("--coref", ex_coref, "Cluster JSON to import instead of clustering");
  extract->add_option("--out", ex_out, "Output graph path, .json or .dot")->required();
  extract->add_option("--max-nodes", ex_max_nodes, "Node cap after merging");
  extract->add_option("--overlap", ex_overlap, "Builtin clustering overlap threshold");

  auto* encode = app.add_subcommand("encode", "Encode a graph file into node features");
  std::string en_graph, en_config, en_out;
  uint64_t en_seed = 0;
  encode->add_option("--graph", en_graph, "Graph JSON produced by extract")->required();
  encode->add_option("--seed", en_seed, "Seed for the self-contained parameters");
  encode->add_option("--config", en_config, "Config file overriding model dimensions");
  encode->add_option("--out", en_out, "Output tensor JSON")->required();

  auto* attn = app.add_subcommand("attn", "Export attention weights for a graph file");
  std::string at_graph, at_config, at_out;
  uint64_t at_seed = 0;
  attn->add_option("--graph", at_graph, "Graph JSON produced by extract")->required();
  attn->add_option("--seed", at_seed, "Seed for the self-contained parameters");
  attn->add_option("--config", at_config, "Config file overriding model dimensions");
  attn->add_option("--out", at_out, "Output attention report JSON")->required();

  auto* gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference gradient battery (tolerance 1e-4)");

  auto* synth = app.add_subcommand("synth", "Generate a templated multiple-choice set");
  std::string sy_out;
  int sy_count = 20;
  uint64_t sy_seed = 0;
  synth->add_option("--out", sy_out, "Output JSONL path")->required();
  synth->add_option("--count", sy_count, "Number of samples");
  synth->add_option("--seed", sy_seed, "Generator seed");

  auto* train = app.add_subcommand("train", "Train one stage on a dataset");
  std::string tr_data, tr_dataset = "simple", tr_features, tr_stage, tr_config, tr_gate, tr_out;
  int tr_expect = -1, tr_limit = 0, tr_epochs = 0;
  double tr_lr = 0.0;
  uint64_t tr_seed = 0, tr_shuffle_seed = 0;
  bool tr_multimodal = false, tr_shuffle_graph = false;
  train->add_option("--data", tr_data, "Dataset file (JSONL)")->required();
  train->add_option("--dataset", tr_dataset, "Dataset format: simple|aquarat|scienceqa");
  train->add_option("--features", tr_features, "Image-feature directory (scienceqa)");
  train->add_option("--expect-count", tr_expect, "Fail unless the file has this many records");
  train->add_option("--limit", tr_limit, "Keep only the first N samples");
  train->add_option("--stage", tr_stage, "rationale|answer")->required();
  train->add_option("--config", tr_config, "Config file (JSON or key=value lines)");
  train->add_option("--epochs", tr_epochs, "Override config epochs");
  train->add_option("--lr", tr_lr, "Override config learning rate");
  train->add_option("--seed", tr_seed, "Override config seed");
  train->add_option("--gate", tr_gate, "Gate mode: learned|closed|open");
  train->add_flag("--multimodal", tr_multimodal, "Wire in the vision branch");
  train->add_flag("--shuffle-graph", tr_shuffle_graph, "Ablation: randomly re-wire graph edges");
  train->add_option("--shuffle-seed", tr_shuffle_seed, "Seed for the re-wiring ablation");
  train->add_option("--out", tr_out, "Output model JSON")->required();

  auto* infer = app.add_subcommand("infer", "Run one stage over a dataset");
  std::string in_data, in_dataset = "simple", in_features, in_stage, in_config, in_gate;
  std::string in_model, in_rationales, in_out, in_attn_out;
  int in_expect = -1, in_limit = 0, in_max_gen = 0;
  bool in_shuffle_graph = false;
  uint64_t in_shuffle_seed = 0;
  infer->add_option("--data", in_data, "Dataset file (JSONL)")->required();
  infer->add_option("--dataset", in_dataset, "Dataset format: simple|aquarat|scienceqa");
  infer->add_option("--features", in_features, "Image-feature directory (scienceqa)");
  infer->add_option("--expect-count", in_expect, "Fail unless the file has this many records");
  infer->add_option("--limit", in_limit, "Keep only the first N samples");
  infer->add_option("--stage", in_stage, "rationale|answer")->required();
  infer->add_option("--model", in_model, "Model JSON written by train")->required();
  infer->add_option("--rationales", in_rationales,
                    "Stage-1 predictions JSONL feeding the answer stage (default: gold)");
  infer->add_option("--config", in_config, "Config file (JSON or key=value lines)");
  infer->add_option("--gate", in_gate, "Gate mode: learned|closed|open");
  infer->add_option("--max-gen", in_max_gen, "Override generation length cap");
  infer->add_flag("--shuffle-graph", in_shuffle_graph, "Ablation: randomly re-wire graph edges");
  infer->add_option("--shuffle-seed", in_shuffle_seed, "Seed for the re-wiring ablation");
  infer->add_option("--out", in_out, "Output predictions JSONL")->required();
  infer->add_option("--attn-out", in_attn_out, "Also write per-sample attention reports");

  auto* eval = app.add_subcommand("eval", "Score predictions against a dataset");
  std::string ev_data, ev_dataset = "simple", ev_features, ev_pred, ev_out;
  int ev_expect = -1;
  eval->add_option("--data", ev_data, "Dataset file (JSONL)")->required();
  eval->add_option("--dataset", ev_dataset, "Dataset format: simple|aquarat|scienceqa");
  eval->add_option("--features", ev_features, "Image-feature directory (scienceqa)");
  eval->add_option("--expect-count", ev_expect, "Fail unless the file has this many records");
  eval->add_option("--pred", ev_pred, "Predictions JSONL")->required();
  eval->add_option("--out", ev_out, "Also write the report JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed())
      return run_extract(ex_input, ex_triplets, ex_coref, ex_out, ex_max_nodes, ex_overlap);
    if (encode->parsed()) return run_encode(en_graph, en_config, en_seed, en_out, false);
    if (attn->parsed()) return run_encode(at_graph, at_config, at_seed, at_out, true);
    if (gradcheck->parsed()) return run_gradcheck();
    if (synth->parsed()) return run_synth(sy_out, sy_count, sy_seed);
    if (train->parsed()) {
      got::PipelineConfig cfg = config_from_file(tr_config);
      if (train->count("--epochs")) cfg.epochs = tr_epochs;
      if (train->count("--lr")) cfg.lr = tr_lr;
      if (train->count("--seed")) cfg.seed = tr_seed;
      if (train->count("--gate")) cfg.gate_mode = got::gate_mode_from_string(tr_gate);
      if (tr_multimodal) cfg.model.multimodal = true;
      if (tr_shuffle_graph) cfg.shuffle_graph = true;
      if (train->count("--shuffle-seed")) cfg.shuffle_seed = tr_shuffle_seed;
      got::validate_config(cfg);
      return run_train(cfg, tr_dataset, tr_data, tr_features, tr_expect, tr_limit,
                       parse_stage(tr_stage), tr_out);
    }
    if (infer->parsed()) {
      got::PipelineConfig cfg = config_from_file(in_config);
      if (infer->count("--gate")) cfg.gate_mode = got::gate_mode_from_string(in_gate);
      if (infer->count("--max-gen")) cfg.max_gen_len = in_max_gen;
      if (in_shuffle_graph) cfg.shuffle_graph = true;
      if (infer->count("--shuffle-seed")) cfg.shuffle_seed = in_shuffle_seed;
      got::validate_config(cfg);
      return run_infer(cfg, in_dataset, in_data, in_features, in_expect, in_limit,
                       parse_stage(in_stage), in_model, in_rationales, in_out, in_attn_out);
    }
    if (eval->parsed()) return run_eval(ev_dataset, ev_data, ev_features, ev_expect, ev_pred, ev_out);
  } catch (const std::exception& e) {
    std::cerr << "got: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
