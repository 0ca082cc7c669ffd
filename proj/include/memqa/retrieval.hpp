#pragma once

#include <string>
#include <vector>

#include "memqa/organization.hpp"
#include "memqa/providers.hpp"

namespace memqa {

enum class Metric { dot, cosine };

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// Exact inner-product index: one row per item, rows aligned with ids.
/// Cosine metric pre-normalizes rows at build time.
struct VectorIndex {
  std::vector<std::string> ids;
  std::vector<float> matrix;  // row-major, size() == ids.size() * dim
  int dim = 0;
  Metric metric = Metric::cosine;

  std::size_t size() const { return ids.size(); }
  const float* row(std::size_t i) const { return matrix.data() + i * dim; }
};

struct ScoredId {
  std::string id;
  float score = 0.0f;
};

struct RetrievalResult {
  std::vector<ScoredId> hits;  // descending score, ties by ascending id

  std::vector<std::string> ids() const;
};

VectorIndex build_index(const MemoryStore& store, EmbeddingProvider& embedder,
                        Metric metric);

/// Exact top-k scan. Returns min(k, N) results.
RetrievalResult search(const VectorIndex& index, const std::string& query,
                       EmbeddingProvider& embedder, int k);
RetrievalResult search_vector(const VectorIndex& index, const EmbeddingVector& query,
                              int k);

/// Reranker scores candidates in [0, 1]; output is the top k by reranker
/// score with ties broken by prior rank. Provider failure falls back to the
/// first k candidates.
RetrievalResult rerank(const std::string& query, const RetrievalResult& candidates,
                       ChatProvider& reranker, const MemoryStore& store, int k);

struct RetrieveConfig {
  int k = 10;
  bool use_rerank = false;
  int rerank_candidates = 20;  // the m in search(top_m) when reranking
  int hops = 0;
};

/// search(top_m) -> optional rerank(-> k) -> optional link expansion,
/// truncated back to k. Expansion merges neighbors at effective rank
/// (anchor rank + hops traveled), seeds winning ties, then by descending
/// edge weight and id — so a top seed's neighbor can displace the weakest
/// seed without flooding out the rest.
std::vector<std::string> retrieve(const std::string& query, const MemoryStore& store,
                                  const VectorIndex& index, EmbeddingProvider& embedder,
                                  ChatProvider* reranker, const RetrieveConfig& config);

/// Binary index file: magic + header (metric, N, d), row-major little-endian
/// 32-bit floats, then a length-prefixed id table.
void write_index(const std::string& path, const VectorIndex& index);
VectorIndex read_index(const std::string& path);

}  // namespace memqa
