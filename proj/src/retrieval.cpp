#include "memqa/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iostream>

#include "memqa/ingestion.hpp"
#include "memqa/textutil.hpp"

namespace memqa {

static_assert(std::endian::native == std::endian::little,
              "index file layout assumes a little-endian host");

const char* metric_name(Metric m) { return m == Metric::dot ? "dot" : "cosine"; }

Metric metric_from_name(const std::string& name) {
  if (name == "dot") return Metric::dot;
  if (name == "cosine") return Metric::cosine;
  throw Error("unknown metric: " + name);
}

std::vector<std::string> RetrievalResult::ids() const {
  std::vector<std::string> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.id);
  return out;
}

VectorIndex build_index(const MemoryStore& store, EmbeddingProvider& embedder,
                        Metric metric) {
  if (store.items.empty()) throw Error("build_index: store is empty");
  VectorIndex index;
  index.metric = metric;
  index.ids = store.ordered_ids();

  std::vector<std::string> renders;
  renders.reserve(index.ids.size());
  for (const auto& id : index.ids) renders.push_back(render_item(store.items.at(id)));
  auto vectors = embedder.embed(renders);

  index.dim = static_cast<int>(vectors.front().values.size());
  index.matrix.reserve(index.ids.size() * index.dim);
  for (auto& v : vectors) {
    if (static_cast<int>(v.values.size()) != index.dim)
      throw Error("build_index: embedding dimension mismatch");
    const EmbeddingVector row = metric == Metric::cosine ? v.normalized() : v;
    index.matrix.insert(index.matrix.end(), row.values.begin(), row.values.end());
  }
  return index;
}

RetrievalResult search_vector(const VectorIndex& index, const EmbeddingVector& query,
                              int k) {
  if (k < 1) throw Error("search: k must be >= 1");
  if (static_cast<int>(query.values.size()) != index.dim)
    throw Error("search: query dimension mismatch");

  const EmbeddingVector q =
      index.metric == Metric::cosine ? query.normalized() : query;
  std::vector<ScoredId> scored;
  scored.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    double s = 0.0;
    const float* row = index.row(i);
    for (int d = 0; d < index.dim; ++d) s += static_cast<double>(row[d]) * q.values[d];
    scored.push_back(ScoredId{index.ids[i], static_cast<float>(s)});
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
  return RetrievalResult{std::move(scored)};
}

RetrievalResult search(const VectorIndex& index, const std::string& query,
                       EmbeddingProvider& embedder, int k) {
  return search_vector(index, embedder.embed({query}).front(), k);
}

RetrievalResult rerank(const std::string& query, const RetrievalResult& candidates,
                       ChatProvider& reranker, const MemoryStore& store, int k) {
  if (k < 1) throw Error("rerank: k must be >= 1");
  if (candidates.hits.size() <= static_cast<std::size_t>(k)) return candidates;

  struct Entry {
    std::size_t prior_rank;
    ScoredId hit;
    double score;
  };
  std::vector<Entry> entries;
  try {
    for (std::size_t rank = 0; rank < candidates.hits.size(); ++rank) {
      const auto& hit = candidates.hits[rank];
      std::vector<ChatMessage> messages;
      messages.push_back({"user",
                          "Rate the relevance of the passage to the query from 0 to 1. "
                          "Respond with a single number.\n"
                          "Query:\n" + query + "\n---\nPassage:\n" +
                              render_item(store.item(hit.id)),
                          {}});
      const double score =
          std::stod(text::trim(reranker.chat("reranker", messages)));
      entries.push_back(Entry{rank, hit, std::clamp(score, 0.0, 1.0)});
    }
  } catch (const std::exception& e) {
    std::cerr << "warning: rerank failed, keeping retrieval order: " << e.what()
              << '\n';
    RetrievalResult out = candidates;
    out.hits.resize(k);
    return out;
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.prior_rank < b.prior_rank;
  });
  RetrievalResult out;
  for (int i = 0; i < k; ++i) {
    out.hits.push_back(entries[i].hit);
    out.hits.back().score = static_cast<float>(entries[i].score);
  }
  return out;
}

std::vector<std::string> retrieve(const std::string& query, const MemoryStore& store,
                                  const VectorIndex& index, EmbeddingProvider& embedder,
                                  ChatProvider* reranker, const RetrieveConfig& config) {
  const int m = config.use_rerank ? std::max(config.rerank_candidates, config.k)
                                  : config.k;
  RetrievalResult result = search(index, query, embedder, m);
  if (config.use_rerank && reranker) {
    result = rerank(query, result, *reranker, store, config.k);
  }
  std::vector<std::string> seeds = result.ids();
  if (seeds.size() > static_cast<std::size_t>(config.k)) seeds.resize(config.k);

  if (config.hops <= 0 || store.mode != StoreMode::linked) return seeds;

  std::map<std::string, std::vector<std::pair<std::string, double>>> adjacency;
  for (const auto& link : store.links) {
    adjacency[link.src].emplace_back(link.dst, link.weight);
    adjacency[link.dst].emplace_back(link.src, link.weight);
  }

  struct Key {
    std::size_t anchor_rank;
    int hop;
    double weight;  // edge weight used at discovery; 1.0 for seeds
    // A neighbor slots in behind its anchor: effective rank grows by one
    // per hop. Seeds (hop 0) win ties so expansion displaces only the
    // weakest seeds.
    bool operator<(const Key& o) const {
      const std::size_t ea = anchor_rank + hop, eb = o.anchor_rank + o.hop;
      if (ea != eb) return ea < eb;
      if (hop != o.hop) return hop < o.hop;
      return weight > o.weight;
    }
  };
  std::map<std::string, Key> best;
  for (std::size_t rank = 0; rank < seeds.size(); ++rank) {
    best[seeds[rank]] = Key{rank, 0, 1.0};
    // per-seed BFS with hop tracking
    std::map<std::string, double> level{{seeds[rank], 1.0}};
    std::set<std::string> visited{seeds[rank]};
    for (int hop = 1; hop <= config.hops && !level.empty(); ++hop) {
      std::map<std::string, double> next;
      for (const auto& [node, _] : level) {
        auto it = adjacency.find(node);
        if (it == adjacency.end()) continue;
        for (const auto& [nbr, weight] : it->second) {
          if (visited.count(nbr)) continue;
          auto [nit, inserted] = next.emplace(nbr, weight);
          if (!inserted) nit->second = std::max(nit->second, weight);
        }
      }
      for (const auto& [nbr, weight] : next) {
        visited.insert(nbr);
        const Key key{rank, hop, weight};
        auto [bit, inserted] = best.emplace(nbr, key);
        if (!inserted && key < bit->second) bit->second = key;
      }
      level = std::move(next);
    }
  }
  struct Entry {
    Key key;
    std::string id;
  };
  std::vector<Entry> entries;
  for (const auto& [id, key] : best) entries.push_back(Entry{key, id});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (b.key < a.key) return false;
    if (a.key < b.key) return true;
    return a.id < b.id;
  });
  std::vector<std::string> out;
  for (const auto& e : entries) {
    out.push_back(e.id);
    if (out.size() == static_cast<std::size_t>(config.k)) break;
  }
  return out;
}

// --- index file -----------------------------------------------------------

namespace {
constexpr char kMagic[4] = {'M', 'Q', 'I', 'X'};
}

void write_index(const std::string& path, const VectorIndex& index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write index file: " + path);
  out.write(kMagic, 4);
  const std::uint32_t version = 1;
  const std::uint32_t metric = index.metric == Metric::dot ? 0 : 1;
  const std::uint64_t n = index.size();
  const std::uint64_t d = index.dim;
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&metric), 4);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&d), 8);
  out.write(reinterpret_cast<const char*>(index.matrix.data()),
            static_cast<std::streamsize>(index.matrix.size() * sizeof(float)));
  for (const auto& id : index.ids) {
    const std::uint32_t len = static_cast<std::uint32_t>(id.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(id.data(), len);
  }
}

VectorIndex read_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw Error("not an index file: " + path);
  std::uint32_t version = 0, metric = 0;
  std::uint64_t n = 0, d = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&metric), 4);
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&d), 8);
  if (!in || version != 1) throw Error("unsupported index file version");
  VectorIndex index;
  index.metric = metric == 0 ? Metric::dot : Metric::cosine;
  index.dim = static_cast<int>(d);
  index.matrix.resize(n * d);
  in.read(reinterpret_cast<char*>(index.matrix.data()),
          static_cast<std::streamsize>(index.matrix.size() * sizeof(float)));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    std::string id(len, '\0');
    in.read(id.data(), len);
    index.ids.push_back(std::move(id));
  }
  if (!in) throw Error("truncated index file: " + path);
  return index;
}

}  // namespace memqa
