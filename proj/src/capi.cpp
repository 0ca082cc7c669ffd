#include "memqa.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "memqa/answering.hpp"
#include "memqa/evaluation.hpp"
#include "memqa/ingestion.hpp"
#include "memqa/model.hpp"
#include "memqa/organization.hpp"
#include "memqa/providers.hpp"
#include "memqa/retrieval.hpp"
#include "memqa/runner.hpp"
#include "memqa/synth.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
memqa_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MEMQA_OK;
  } catch (const memqa::ProviderFailure& e) {
    g_last_error = e.what();
    return MEMQA_ERR_PROVIDER;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MEMQA_ERR_RUNTIME;
  }
}

memqa_status invalid(const char* message) {
  g_last_error = message;
  return MEMQA_ERR_INVALID_ARGUMENT;
}

// store files carry the full organization state; a plain memory file is
// accepted too and loads as a piled store
memqa::MemoryStore load_store_or_memory(const std::string& path) {
  // type-tagged store lines vs. plain memory-item lines; a missing or
  // unreadable file surfaces through the memory-file reader
  try {
    return memqa::read_store(path);
  } catch (const std::exception&) {
    return memqa::build_piled(memqa::read_memory_file(path));
  }
}

memqa::RetrieveConfig make_retrieve_config(int k, int use_rerank,
                                           int rerank_candidates, int hops) {
  memqa::RetrieveConfig rc;
  rc.k = k;
  rc.use_rerank = use_rerank != 0;
  rc.rerank_candidates = rerank_candidates;
  rc.hops = hops;
  return rc;
}

std::string query_to_json(const memqa::MemoryStore* store,
                          const memqa::VectorIndex& index,
                          memqa::MockEmbedder& embedder, memqa::ChatProvider& chat,
                          const std::string& query,
                          const memqa::RetrieveConfig& rc) {
  using json = nlohmann::ordered_json;
  // the scan provides scores; expansion hits beyond it report null
  const auto scored = memqa::search(
      index, query, embedder,
      std::max(rc.k, rc.use_rerank ? rc.rerank_candidates : rc.k));
  std::vector<std::string> ids;
  if ((rc.use_rerank || rc.hops > 0) && store) {
    ids = memqa::retrieve(query, *store, index, embedder, &chat, rc);
  } else {
    auto result = scored;
    if (result.hits.size() > static_cast<std::size_t>(rc.k))
      result.hits.resize(rc.k);
    ids = result.ids();
  }
  json out = json::array();
  for (const auto& id : ids) {
    json entry;
    entry["id"] = id;
    entry["score"] = nullptr;
    for (const auto& hit : scored.hits) {
      if (hit.id == id) {
        entry["score"] = hit.score;
        break;
      }
    }
    out.push_back(std::move(entry));
  }
  return out.dump();
}

}  // namespace

struct memqa_engine {
  memqa::MemoryStore store;
  bool has_store = false;
  memqa::VectorIndex index;
  memqa::MockEmbedder embedder;
  memqa::MockChatProvider chat;

  explicit memqa_engine(uint64_t seed) : embedder(seed), chat(seed) {}
};

extern "C" {

const char* memqa_version(void) { return "0.1.0"; }

const char* memqa_last_error(void) { return g_last_error.c_str(); }

void memqa_string_free(char* s) { std::free(s); }

memqa_status memqa_synth(uint64_t seed, int emails, int images, int videos,
                         int conflict_pairs, int qa_total,
                         const char* corpus_out, const char* qa_out) {
  if (!corpus_out || !qa_out) return invalid("synth: output paths are required");
  return guard([&] {
    memqa::SynthConfig config;
    config.emails = emails;
    config.images = images;
    config.videos = videos;
    const memqa::QaCounts counts = memqa::default_qa_counts(qa_total);
    config.conflict_pairs =
        conflict_pairs >= 0 ? conflict_pairs : std::max(emails / 10, counts.mut);
    auto [corpus, world] = memqa::generate_corpus(seed, config);
    memqa::write_corpus(corpus_out, corpus);
    memqa::write_qa_file(qa_out, memqa::generate_qa(world, counts));
  });
}

memqa_status memqa_ingest(const char* corpus_path, const char* representation,
                          const char* schema_path, uint64_t seed, int workers,
                          const char* memory_out) {
  if (!corpus_path || !representation || !memory_out)
    return invalid("ingest: corpus_path, representation, memory_out are required");
  return guard([&] {
    const std::string rep = representation;
    if (rep != "dm" && rep != "sgm")
      throw memqa::Error("representation must be dm or sgm");
    const memqa::Schema schema =
        schema_path ? memqa::schema_from_json(memqa::read_text_file(schema_path))
                    : memqa::Schema::defaults();
    memqa::MockChatProvider chat(seed);
    memqa::MockGeocoder geocoder;
    auto items = memqa::ingest_corpus(
        memqa::read_corpus(corpus_path),
        rep == "dm" ? memqa::MemoryKind::dm : memqa::MemoryKind::sgm, schema, chat,
        geocoder, workers < 1 ? 1 : workers);
    memqa::write_memory_file(memory_out, items);
  });
}

memqa_status memqa_link(const char* memory_path, double threshold, int candidates,
                        int apply_updates, uint64_t seed, const char* store_out) {
  if (!memory_path || !store_out)
    return invalid("link: memory_path and store_out are required");
  return guard([&] {
    memqa::MockChatProvider chat(seed);
    memqa::MockEmbedder embedder(seed);
    auto store = memqa::build_links(load_store_or_memory(memory_path), chat,
                                    embedder, threshold, candidates);
    if (apply_updates)
      store = memqa::apply_updates(std::move(store), chat,
                                   memqa::Schema::defaults());
    memqa::write_store(store_out, store);
  });
}

memqa_status memqa_index(const char* store_path, const char* metric,
                         uint64_t seed, const char* index_out) {
  if (!store_path || !metric || !index_out)
    return invalid("index: store_path, metric, index_out are required");
  return guard([&] {
    memqa::MockEmbedder embedder(seed);
    memqa::write_index(index_out,
                       memqa::build_index(load_store_or_memory(store_path),
                                          embedder, memqa::metric_from_name(metric)));
  });
}

memqa_status memqa_query(const char* index_path, const char* store_path,
                         const char* query, int k, int use_rerank,
                         int rerank_candidates, int hops, uint64_t seed,
                         char** ids_json_out) {
  if (!index_path || !query || !ids_json_out)
    return invalid("query: index_path, query, ids_json_out are required");
  if ((use_rerank || hops > 0) && !store_path)
    return invalid("query: rerank and link expansion need store_path");
  return guard([&] {
    memqa::MockEmbedder embedder(seed);
    memqa::MockChatProvider chat(seed);
    const auto index = memqa::read_index(index_path);
    memqa::MemoryStore store;
    if (store_path) store = load_store_or_memory(store_path);
    *ids_json_out = dup_string(query_to_json(
        store_path ? &store : nullptr, index, embedder, chat, query,
        make_retrieve_config(k, use_rerank, rerank_candidates, hops)));
  });
}

memqa_status memqa_answer(const char* index_path, const char* store_path,
                          const char* qa_path, const char* mode, int k,
                          int max_iters, int use_rerank, int rerank_candidates,
                          int hops, uint64_t seed, const char* pred_out) {
  if (!index_path || !store_path || !qa_path || !mode || !pred_out)
    return invalid("answer: index_path, store_path, qa_path, mode, pred_out are required");
  return guard([&] {
    memqa::MockEmbedder embedder(seed);
    memqa::MockChatProvider chat(seed);
    const auto store = load_store_or_memory(store_path);
    const auto index = memqa::read_index(index_path);
    const auto preds = memqa::answer_questions(
        memqa::read_qa_file(qa_path), store, index, embedder, chat,
        memqa::answer_mode_from_name(mode),
        make_retrieve_config(k, use_rerank, rerank_candidates, hops), max_iters);
    memqa::write_pred_file(pred_out, preds);
  });
}

memqa_status memqa_evaluate(const char* qa_path, const char* pred_path, int k,
                            const char* judge, const char* judge_endpoint,
                            uint64_t seed, const char* eval_out,
                            const char* report_out, char** report_text_out) {
  if (!qa_path || !pred_path || !judge)
    return invalid("evaluate: qa_path, pred_path, judge are required");
  return guard([&] {
    memqa::ProviderConfig provider;
    provider.seed = seed;
    const std::string judge_kind = judge;
    if (judge_kind == "remote") {
      if (!judge_endpoint)
        throw memqa::Error("remote judge needs an endpoint");
      provider.kind = memqa::ProviderConfig::Kind::remote;
      provider.endpoint = judge_endpoint;
    } else if (judge_kind != "mock") {
      throw memqa::Error("judge must be mock or remote");
    }
    auto chat = memqa::make_chat_provider(provider);
    const auto qas = memqa::read_qa_file(qa_path);
    const auto records =
        memqa::evaluate_all(qas, memqa::read_pred_file(pred_path), k, *chat);
    if (eval_out) memqa::write_eval_file(eval_out, records);
    const auto report = memqa::aggregate_report(records, qas, k);
    const std::string text = memqa::report_to_text(report);
    if (report_out) memqa::write_text_file(report_out, text);
    if (report_text_out) *report_text_out = dup_string(text);
  });
}

memqa_status memqa_run(const char* config_path, char** report_text_out) {
  if (!config_path) return invalid("run: config_path is required");
  return guard([&] {
    const auto result =
        memqa::run_experiment(memqa::RunConfig::parse_file(config_path));
    if (report_text_out) *report_text_out = dup_string(result.report_text);
  });
}

memqa_status memqa_run_text(const char* config_text, char** report_text_out) {
  if (!config_text) return invalid("run: config_text is required");
  return guard([&] {
    const auto result =
        memqa::run_experiment(memqa::RunConfig::parse(config_text));
    if (report_text_out) *report_text_out = dup_string(result.report_text);
  });
}

memqa_status memqa_engine_open(const char* store_path, const char* index_path,
                               uint64_t seed, memqa_engine** engine_out) {
  if (!index_path || !engine_out)
    return invalid("engine_open: index_path and engine_out are required");
  return guard([&] {
    auto engine = std::make_unique<memqa_engine>(seed);
    engine->index = memqa::read_index(index_path);
    if (store_path) {
      engine->store = load_store_or_memory(store_path);
      engine->has_store = true;
    }
    *engine_out = engine.release();
  });
}

memqa_status memqa_engine_query(memqa_engine* engine, const char* query, int k,
                                int use_rerank, int rerank_candidates, int hops,
                                char** ids_json_out) {
  if (!engine || !query || !ids_json_out)
    return invalid("engine_query: engine, query, ids_json_out are required");
  if ((use_rerank || hops > 0) && !engine->has_store)
    return invalid("engine_query: rerank and link expansion need a store");
  return guard([&] {
    *ids_json_out = dup_string(query_to_json(
        engine->has_store ? &engine->store : nullptr, engine->index,
        engine->embedder, engine->chat, query,
        make_retrieve_config(k, use_rerank, rerank_candidates, hops)));
  });
}

void memqa_engine_close(memqa_engine* engine) { delete engine; }

}  // extern "C"
