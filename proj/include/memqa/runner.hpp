#pragma once

#include <map>
#include <string>

#include "memqa/evaluation.hpp"
#include "memqa/model.hpp"

namespace memqa {

/// Flat key=value experiment configuration. Unknown keys are rejected before
/// any stage runs.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string representation = "sgm";  // dm | sgm
  std::string organization = "piled";  // piled | linked
  std::string answer_mode = "single_pass";
  int k = 10;
  bool use_rerank = false;
  int rerank_candidates = 20;
  int hops = 1;  // link expansion during retrieval (linked stores only)
  int max_iters = 3;
  int emails = 50;
  int images = 40;
  int videos = 10;
  int conflict_pairs = -1;
  int qa_total = 100;
  int workers = 1;
  double link_threshold = 0.6;
  int link_candidate_k = 8;
  bool apply_updates = true;  // only meaningful for linked stores
  std::string out_dir = "run";

  static RunConfig parse(const std::string& text);
  static RunConfig parse_file(const std::string& path);
  std::string to_text() const;
};

struct RunManifest {
  std::map<std::string, std::string> config;          // flattened snapshot
  std::map<std::string, double> stage_seconds;        // per-stage wall time
  double encoding_seconds = 0.0;                      // ingest + link + index
  std::map<std::string, std::string> output_digests;  // file -> content hash

  std::string to_json() const;
};

struct RunResult {
  AggregateReport report;
  RunManifest manifest;
  std::string report_text;
};

/// Executes synth -> ingest -> [link/update] -> index -> answer -> evaluate,
/// writing every stage artifact plus report and manifest under out_dir.
/// A stage failure raises an Error naming the stage; earlier outputs remain.
RunResult run_experiment(const RunConfig& config);

}  // namespace memqa
