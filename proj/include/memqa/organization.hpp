#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "memqa/model.hpp"
#include "memqa/providers.hpp"

namespace memqa {

/// Undirected weighted link, stored with src < dst.
struct Link {
  std::string src;
  std::string dst;
  double weight = 0.0;
  bool operator==(const Link&) const = default;
};

struct UpdateLogEntry {
  std::string item_id;
  int old_revision = 0;
  int new_revision = 0;
  std::string rationale;
  std::string previous_item_json;  // full pre-update item, for recoverability
};

enum class StoreMode { piled, linked };

struct MemoryStore {
  std::map<std::string, MemoryItem> items;
  std::vector<Link> links;
  std::vector<UpdateLogEntry> update_log;
  StoreMode mode = StoreMode::piled;

  std::vector<std::string> ordered_ids() const;
  std::vector<MemoryItem> items_in_order() const;
  const MemoryItem& item(const std::string& id) const;
};

MemoryStore build_piled(const std::vector<MemoryItem>& items);

/// LLM link construction with an embedding-similarity prefilter: each item's
/// candidate_k nearest neighbors are scored by the linker in [0, 1]; edges at
/// or above the threshold survive, with symmetric closure keeping the max
/// directed score.
MemoryStore build_links(MemoryStore store, ChatProvider& linker,
                        EmbeddingProvider& embedder, double threshold,
                        int candidate_k);

/// For each linked pair ordered by timestamp, the updater may emit revised
/// content for the earlier item. Updates are non-destructive: the previous
/// item is kept in the update log and revisions increment.
MemoryStore apply_updates(MemoryStore store, ChatProvider& updater,
                          const Schema& schema);

/// BFS over links up to `hops`; returns seeds plus everything reached, in
/// deterministic (hop, descending edge weight, id) order.
std::vector<std::string> expand_neighbors_ordered(const MemoryStore& store,
                                                  const std::set<std::string>& seeds,
                                                  int hops);
std::set<std::string> expand_neighbors(const MemoryStore& store,
                                       const std::set<std::string>& seeds, int hops);

void write_store(const std::string& path, const MemoryStore& store);
MemoryStore read_store(const std::string& path);

}  // namespace memqa
