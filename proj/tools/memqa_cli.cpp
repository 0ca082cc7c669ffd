#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "memqa.h"

namespace {

int fail(const char* stage, memqa_status status) {
  std::fprintf(stderr, "error in stage %s: %s\n", stage, memqa_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memqa: personal-memory question answering pipeline"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  int workers = 1;
  app.add_option("--seed", seed, "random seed shared by every stage");
  app.add_option("--workers", workers, "worker threads for ingestion");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus + QA file");
  int emails = 50, images = 40, videos = 10, qa_total = 100, conflict_pairs = -1;
  std::string out_dir = ".";
  synth->add_option("--emails", emails);
  synth->add_option("--images", images);
  synth->add_option("--videos", videos);
  synth->add_option("--qa", qa_total);
  synth->add_option("--conflict-pairs", conflict_pairs,
                    "booking/invoice pairs; -1 derives from the email budget");
  synth->add_option("--out-dir", out_dir, "writes corpus.jsonl and qa.jsonl here");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "preprocess a corpus into memory items");
  std::string corpus_file, repr = "sgm", schema_file, memory_out;
  ingest->add_option("--corpus", corpus_file)->required();
  ingest->add_option("--repr", repr, "dm | sgm");
  ingest->add_option("--schema", schema_file, "schema JSON; omitted = built-in");
  ingest->add_option("--out", memory_out)->required();

  // link
  auto* link = app.add_subcommand("link", "build a linked store from a memory file");
  std::string link_memory, store_out;
  double threshold = 0.5;
  int candidates = 10;
  bool no_updates = false;
  link->add_option("--memory", link_memory)->required();
  link->add_option("--threshold", threshold, "linker score cutoff in (0, 1]");
  link->add_option("--candidates", candidates, "similarity prefilter size");
  link->add_flag("--no-updates", no_updates, "skip the memory-update pass");
  link->add_option("--out", store_out)->required();

  // index
  auto* index = app.add_subcommand("index", "embed a store into a vector index");
  std::string index_store, metric = "cosine", index_out;
  index->add_option("--store", index_store)->required();
  index->add_option("--metric", metric, "cosine | dot");
  index->add_option("--out", index_out)->required();

  // query
  auto* query = app.add_subcommand("query", "top-k retrieval for one query");
  std::string query_index, query_store, query_text;
  int query_k = 10, query_candidates = 20, hops = 0;
  bool use_rerank = false;
  query->add_option("--index", query_index)->required();
  query->add_option("--store", query_store, "needed for --rerank / --hops");
  query->add_option("--q", query_text)->required();
  query->add_option("--k", query_k);
  query->add_flag("--rerank", use_rerank);
  query->add_option("--candidates", query_candidates);
  query->add_option("--hops", hops, "link expansion depth (linked stores)");

  // answer
  auto* answer = app.add_subcommand("answer", "answer a QA file against an index");
  std::string ans_index, ans_store, ans_qa, mode = "single", pred_out;
  int ans_k = 10, max_iters = 3, ans_candidates = 20, ans_hops = 0;
  bool ans_rerank = false;
  answer->add_option("--index", ans_index)->required();
  answer->add_option("--store", ans_store)->required();
  answer->add_option("--qa", ans_qa)->required();
  answer->add_option("--mode", mode, "no_evidence | oracle | single | agentic");
  answer->add_option("--k", ans_k);
  answer->add_option("--max-iters", max_iters);
  answer->add_flag("--rerank", ans_rerank);
  answer->add_option("--candidates", ans_candidates);
  answer->add_option("--hops", ans_hops);
  answer->add_option("--out", pred_out)->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  std::string eval_qa, eval_pred, judge = "mock", judge_endpoint, report_file,
              eval_out;
  int eval_k = 10;
  evaluate->add_option("--qa", eval_qa)->required();
  evaluate->add_option("--pred", eval_pred)->required();
  evaluate->add_option("--k", eval_k);
  evaluate->add_option("--judge", judge, "mock | remote");
  evaluate->add_option("--endpoint", judge_endpoint, "chat endpoint for --judge remote");
  evaluate->add_option("--report", report_file)->required();
  evaluate->add_option("--eval-out", eval_out, "per-question line records");

  // run
  auto* run = app.add_subcommand("run", "full experiment from a config file");
  std::string config_file;
  run->add_option("--config", config_file)->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    const std::string corpus_path = out_dir + "/corpus.jsonl";
    const std::string qa_path = out_dir + "/qa.jsonl";
    const auto status = memqa_synth(seed, emails, images, videos, conflict_pairs,
                                    qa_total, corpus_path.c_str(), qa_path.c_str());
    if (status != MEMQA_OK) return fail("synth", status);
    std::printf("wrote %s and %s\n", corpus_path.c_str(), qa_path.c_str());
  } else if (ingest->parsed()) {
    const auto status = memqa_ingest(corpus_file.c_str(), repr.c_str(),
                                     schema_file.empty() ? nullptr : schema_file.c_str(),
                                     seed, workers, memory_out.c_str());
    if (status != MEMQA_OK) return fail("ingest", status);
    std::printf("wrote %s\n", memory_out.c_str());
  } else if (link->parsed()) {
    const auto status = memqa_link(link_memory.c_str(), threshold, candidates,
                                   no_updates ? 0 : 1, seed, store_out.c_str());
    if (status != MEMQA_OK) return fail("link", status);
    std::printf("wrote %s\n", store_out.c_str());
  } else if (index->parsed()) {
    const auto status =
        memqa_index(index_store.c_str(), metric.c_str(), seed, index_out.c_str());
    if (status != MEMQA_OK) return fail("index", status);
    std::printf("wrote %s\n", index_out.c_str());
  } else if (query->parsed()) {
    char* json = nullptr;
    const auto status = memqa_query(
        query_index.c_str(), query_store.empty() ? nullptr : query_store.c_str(),
        query_text.c_str(), query_k, use_rerank ? 1 : 0, query_candidates, hops,
        seed, &json);
    if (status != MEMQA_OK) return fail("query", status);
    std::printf("%s\n", json);
    memqa_string_free(json);
  } else if (answer->parsed()) {
    const auto status = memqa_answer(ans_index.c_str(), ans_store.c_str(),
                                     ans_qa.c_str(), mode.c_str(), ans_k, max_iters,
                                     ans_rerank ? 1 : 0, ans_candidates, ans_hops,
                                     seed, pred_out.c_str());
    if (status != MEMQA_OK) return fail("answer", status);
    std::printf("wrote %s\n", pred_out.c_str());
  } else if (evaluate->parsed()) {
    char* text = nullptr;
    const auto status = memqa_evaluate(
        eval_qa.c_str(), eval_pred.c_str(), eval_k, judge.c_str(),
        judge_endpoint.empty() ? nullptr : judge_endpoint.c_str(), seed,
        eval_out.empty() ? nullptr : eval_out.c_str(), report_file.c_str(), &text);
    if (status != MEMQA_OK) return fail("evaluate", status);
    std::printf("%s", text);
    memqa_string_free(text);
  } else if (run->parsed()) {
    char* text = nullptr;
    const auto status = memqa_run(config_file.c_str(), &text);
    if (status != MEMQA_OK) return fail("run", status);
    std::printf("%s", text);
    memqa_string_free(text);
  }
  return 0;
}
