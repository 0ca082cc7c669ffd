#ifndef MEMQA_H
#define MEMQA_H

/* C interface to the memqa engine. Every function is file-oriented and maps
 * onto one pipeline stage; strings returned through out-parameters are heap
 * allocated and must be released with memqa_string_free. Functions return
 * MEMQA_OK or an error code; memqa_last_error() describes the most recent
 * failure on the calling thread. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MEMQA_OK = 0,
  MEMQA_ERR_INVALID_ARGUMENT = 1,
  MEMQA_ERR_RUNTIME = 2,
  MEMQA_ERR_PROVIDER = 3
} memqa_status;

const char* memqa_version(void);

/* Message for the last failing call on this thread; empty string if none.
 * The pointer stays valid until the next memqa call on the same thread. */
const char* memqa_last_error(void);

void memqa_string_free(char* s);

/* Generate a synthetic corpus + QA file. conflict_pairs < 0 picks a default
 * from the email budget. */
memqa_status memqa_synth(uint64_t seed, int emails, int images, int videos,
                         int conflict_pairs, int qa_total,
                         const char* corpus_out, const char* qa_out);

/* representation: "dm" | "sgm". schema_path NULL uses the built-in schema. */
memqa_status memqa_ingest(const char* corpus_path, const char* representation,
                          const char* schema_path, uint64_t seed, int workers,
                          const char* memory_out);

/* Build a linked store from a memory file. apply_updates nonzero runs the
 * updater pass over linked pairs. */
memqa_status memqa_link(const char* memory_path, double threshold,
                        int candidates, int apply_updates, uint64_t seed,
                        const char* store_out);

/* metric: "cosine" | "dot". Accepts either a store file or a memory file. */
memqa_status memqa_index(const char* store_path, const char* metric,
                         uint64_t seed, const char* index_out);

/* Top-k retrieval; ids_json_out receives a JSON array of
 * {"id": ..., "score": ...}. store_path may be NULL when rerank and hops
 * are unused. */
memqa_status memqa_query(const char* index_path, const char* store_path,
                         const char* query, int k, int use_rerank,
                         int rerank_candidates, int hops, uint64_t seed,
                         char** ids_json_out);

/* mode: "no_evidence" | "oracle" | "single" | "agentic". */
memqa_status memqa_answer(const char* index_path, const char* store_path,
                          const char* qa_path, const char* mode, int k,
                          int max_iters, int use_rerank, int rerank_candidates,
                          int hops, uint64_t seed, const char* pred_out);

/* judge: "mock" | "remote" (remote requires judge_endpoint). eval_out gets
 * one line per question; report_out gets the aggregate table. Either output
 * path and report_text_out may be NULL. */
memqa_status memqa_evaluate(const char* qa_path, const char* pred_path, int k,
                            const char* judge, const char* judge_endpoint,
                            uint64_t seed, const char* eval_out,
                            const char* report_out, char** report_text_out);

/* Full experiment from a key=value config file; writes every stage artifact
 * plus report and manifest under the configured output directory. */
memqa_status memqa_run(const char* config_path, char** report_text_out);
memqa_status memqa_run_text(const char* config_text, char** report_text_out);

/* A loaded store + index pair for repeated queries. */
typedef struct memqa_engine memqa_engine;

memqa_status memqa_engine_open(const char* store_path, const char* index_path,
                               uint64_t seed, memqa_engine** engine_out);
memqa_status memqa_engine_query(memqa_engine* engine, const char* query, int k,
                                int use_rerank, int rerank_candidates, int hops,
                                char** ids_json_out);
void memqa_engine_close(memqa_engine* engine);

#ifdef __cplusplus
}
#endif

#endif /* MEMQA_H */
