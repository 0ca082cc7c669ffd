#include "memqa/organization.hpp"

#include <algorithm>
#include <iostream>

#include <json.hpp>

#include "memqa/ingestion.hpp"
#include "memqa/textutil.hpp"

namespace memqa {

using json = nlohmann::ordered_json;

std::vector<std::string> MemoryStore::ordered_ids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& [id, _] : items) out.push_back(id);
  return out;
}

std::vector<MemoryItem> MemoryStore::items_in_order() const {
  std::vector<MemoryItem> out;
  out.reserve(items.size());
  for (const auto& [_, item] : items) out.push_back(item);
  return out;
}

const MemoryItem& MemoryStore::item(const std::string& id) const {
  auto it = items.find(id);
  if (it == items.end()) throw Error("unknown item id: " + id);
  return it->second;
}

MemoryStore build_piled(const std::vector<MemoryItem>& items) {
  MemoryStore store;
  store.mode = StoreMode::piled;
  for (const auto& item : items) {
    if (!store.items.emplace(item.id, item).second)
      throw Error("duplicate item id: " + item.id);
  }
  return store;
}

MemoryStore build_links(MemoryStore store, ChatProvider& linker,
                        EmbeddingProvider& embedder, double threshold,
                        int candidate_k) {
  if (store.mode != StoreMode::piled) throw Error("build_links expects a piled store");
  if (threshold <= 0.0 || threshold > 1.0) throw Error("threshold must be in (0, 1]");
  if (candidate_k < 1) throw Error("candidate_k must be >= 1");

  const auto ids = store.ordered_ids();
  std::vector<std::string> renders;
  renders.reserve(ids.size());
  for (const auto& id : ids) renders.push_back(render_item(store.items.at(id)));

  std::vector<EmbeddingVector> vectors;
  if (!renders.empty()) vectors = embedder.embed(renders);

  // directed best score per canonical (src < dst) pair
  std::map<std::pair<std::string, std::string>, double> edges;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    // prefilter: candidate_k nearest by embedding cosine, ties by id
    std::vector<std::pair<double, std::size_t>> sims;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (j == i) continue;
      sims.emplace_back(cosine(vectors[i], vectors[j]), j);
    }
    std::sort(sims.begin(), sims.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return ids[a.second] < ids[b.second];
    });
    if (sims.size() > static_cast<std::size_t>(candidate_k))
      sims.resize(candidate_k);

    for (const auto& [_, j] : sims) {
      std::vector<ChatMessage> messages;
      messages.push_back({"user",
                          "Score the relatedness of the two memory items from 0 to 1. "
                          "Respond with a single number.\n"
                          "Item A:\n" + renders[i] + "\n---\nItem B:\n" + renders[j],
                          {}});
      double score;
      try {
        score = std::stod(text::trim(linker.chat("linker", messages)));
      } catch (const std::exception& e) {
        std::cerr << "warning: link scoring failed for (" << ids[i] << ", "
                  << ids[j] << "): " << e.what() << '\n';
        continue;
      }
      if (score < threshold) continue;
      auto key = ids[i] < ids[j] ? std::make_pair(ids[i], ids[j])
                                 : std::make_pair(ids[j], ids[i]);
      auto [it, inserted] = edges.emplace(key, score);
      if (!inserted) it->second = std::max(it->second, score);
    }
  }

  store.links.clear();
  for (const auto& [key, weight] : edges) {
    store.links.push_back(Link{key.first, key.second, std::min(weight, 1.0)});
  }
  store.mode = StoreMode::linked;
  return store;
}

namespace {

bool parse_update_reply(const std::string& reply, const MemoryItem& target,
                        const Schema& schema, MemoryItem* updated,
                        std::string* rationale, std::string* rejection) {
  json j;
  try {
    j = json::parse(reply);
  } catch (const json::exception& e) {
    *rejection = std::string("malformed updater reply: ") + e.what();
    return false;
  }
  *updated = target;
  *rationale = j.contains("rationale") ? j["rationale"].get<std::string>() : "";
  if (target.kind == MemoryKind::dm) {
    if (!j.contains("text") || !j["text"].is_string()) {
      *rejection = "updater reply missing text for dm item";
      return false;
    }
    updated->text = j["text"].get<std::string>();
    return true;
  }
  if (!j.contains("fields") || !j["fields"].is_array()) {
    *rejection = "updater reply missing fields for sgm item";
    return false;
  }
  std::vector<std::pair<std::string, std::string>> fields;
  for (const auto& pair : j["fields"]) {
    if (!pair.is_array() || pair.size() != 2) {
      *rejection = "updater field entries must be [key, value] pairs";
      return false;
    }
    fields.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  }
  const auto& expected = schema.for_source(target.source);
  if (fields.size() != expected.size()) {
    *rejection = "updater fields do not match schema arity";
    return false;
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (fields[i].first != expected[i]) {
      *rejection = "updater fields do not match schema order at '" + expected[i] + "'";
      return false;
    }
  }
  // id/time/source stay authoritative
  for (auto& [k, v] : fields) {
    if (k == "id") v = target.id;
    else if (k == "time") v = target.timestamp.to_field_time();
    else if (k == "source") v = source_name(target.source);
  }
  updated->fields = std::move(fields);
  return true;
}

}  // namespace

MemoryStore apply_updates(MemoryStore store, ChatProvider& updater,
                          const Schema& schema) {
  if (store.mode != StoreMode::linked) throw Error("apply_updates expects a linked store");

  // canonical processing order: by earlier item timestamp, then ids
  struct Pair {
    std::string earlier;
    std::string later;
  };
  std::vector<Pair> pairs;
  for (const auto& link : store.links) {
    const auto& a = store.items.at(link.src);
    const auto& b = store.items.at(link.dst);
    if (a.timestamp == b.timestamp) continue;  // no earlier/later ordering
    if (a.timestamp < b.timestamp) pairs.push_back({link.src, link.dst});
    else pairs.push_back({link.dst, link.src});
  }
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& x, const Pair& y) {
    const auto& tx = store.items.at(x.earlier).timestamp;
    const auto& ty = store.items.at(y.earlier).timestamp;
    if (tx != ty) return tx < ty;
    if (x.earlier != y.earlier) return x.earlier < y.earlier;
    return x.later < y.later;
  });

  for (const auto& pair : pairs) {
    MemoryItem& earlier = store.items.at(pair.earlier);
    const MemoryItem& later = store.items.at(pair.later);
    std::vector<ChatMessage> messages;
    messages.push_back({"user",
                        "Decide whether the later record supersedes information in the "
                        "earlier memory item. Respond with NO_UPDATE, or with a JSON "
                        "object carrying the revised content and a rationale.\n"
                        "Earlier:\n" + item_to_json(earlier) + "\n---\nLater:\n" +
                            item_to_json(later),
                        {}});
    std::string reply;
    try {
      reply = text::trim(updater.chat("updater", messages));
    } catch (const ProviderFailure& e) {
      std::cerr << "warning: updater failed for (" << pair.earlier << ", "
                << pair.later << "): " << e.what() << '\n';
      continue;
    }
    if (reply == "NO_UPDATE") continue;

    MemoryItem updated;
    std::string rationale, rejection;
    if (!parse_update_reply(reply, earlier, schema, &updated, &rationale, &rejection)) {
      std::cerr << "warning: update rejected for " << pair.earlier << ": "
                << rejection << '\n';
      continue;
    }
    UpdateLogEntry entry;
    entry.item_id = earlier.id;
    entry.old_revision = earlier.revision;
    entry.new_revision = earlier.revision + 1;
    entry.rationale = rationale;
    entry.previous_item_json = item_to_json(earlier);
    store.update_log.push_back(std::move(entry));

    updated.revision = earlier.revision + 1;
    earlier = std::move(updated);
  }
  return store;
}

std::vector<std::string> expand_neighbors_ordered(const MemoryStore& store,
                                                  const std::set<std::string>& seeds,
                                                  int hops) {
  if (store.mode != StoreMode::linked) throw Error("expand_neighbors expects a linked store");
  if (hops < 0) throw Error("hops must be >= 0");
  for (const auto& s : seeds) {
    if (!store.items.count(s)) throw Error("unknown seed id: " + s);
  }

  std::map<std::string, std::vector<std::pair<std::string, double>>> adjacency;
  for (const auto& link : store.links) {
    adjacency[link.src].emplace_back(link.dst, link.weight);
    adjacency[link.dst].emplace_back(link.src, link.weight);
  }

  std::vector<std::string> out(seeds.begin(), seeds.end());  // hop 0, by id
  std::set<std::string> visited(seeds.begin(), seeds.end());
  std::vector<std::string> frontier = out;
  for (int hop = 1; hop <= hops; ++hop) {
    // best incoming weight per newly reached node
    std::map<std::string, double> reached;
    for (const auto& node : frontier) {
      auto it = adjacency.find(node);
      if (it == adjacency.end()) continue;
      for (const auto& [next, weight] : it->second) {
        if (visited.count(next)) continue;
        auto [rit, inserted] = reached.emplace(next, weight);
        if (!inserted) rit->second = std::max(rit->second, weight);
      }
    }
    std::vector<std::pair<std::string, double>> level(reached.begin(), reached.end());
    std::sort(level.begin(), level.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    frontier.clear();
    for (const auto& [id, _] : level) {
      out.push_back(id);
      visited.insert(id);
      frontier.push_back(id);
    }
    if (frontier.empty()) break;
  }
  return out;
}

std::set<std::string> expand_neighbors(const MemoryStore& store,
                                       const std::set<std::string>& seeds, int hops) {
  auto ordered = expand_neighbors_ordered(store, seeds, hops);
  return {ordered.begin(), ordered.end()};
}

// --- store file -----------------------------------------------------------

void write_store(const std::string& path, const MemoryStore& store) {
  std::string out;
  {
    json j;
    j["type"] = "mode";
    j["mode"] = store.mode == StoreMode::piled ? "piled" : "linked";
    out += j.dump() + "\n";
  }
  for (const auto& [_, item] : store.items) {
    json j;
    j["type"] = "item";
    j["item"] = json::parse(item_to_json(item));
    out += j.dump() + "\n";
  }
  for (const auto& link : store.links) {
    json j;
    j["type"] = "link";
    j["src"] = link.src;
    j["dst"] = link.dst;
    j["weight"] = link.weight;
    out += j.dump() + "\n";
  }
  for (const auto& entry : store.update_log) {
    json j;
    j["type"] = "update";
    j["item_id"] = entry.item_id;
    j["old_revision"] = entry.old_revision;
    j["new_revision"] = entry.new_revision;
    j["rationale"] = entry.rationale;
    j["previous"] = json::parse(entry.previous_item_json);
    out += j.dump() + "\n";
  }
  write_text_file(path, out);
}

MemoryStore read_store(const std::string& path) {
  MemoryStore store;
  bool mode_seen = false;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "mode") {
      const std::string mode = j.at("mode").get<std::string>();
      if (mode == "piled") store.mode = StoreMode::piled;
      else if (mode == "linked") store.mode = StoreMode::linked;
      else throw Error("unknown store mode: " + mode);
      mode_seen = true;
    } else if (type == "item") {
      MemoryItem item = item_from_json(j.at("item").dump());
      if (!store.items.emplace(item.id, std::move(item)).second)
        throw Error("duplicate item id in store file");
    } else if (type == "link") {
      store.links.push_back(Link{j.at("src").get<std::string>(),
                                 j.at("dst").get<std::string>(),
                                 j.at("weight").get<double>()});
    } else if (type == "update") {
      UpdateLogEntry entry;
      entry.item_id = j.at("item_id").get<std::string>();
      entry.old_revision = j.at("old_revision").get<int>();
      entry.new_revision = j.at("new_revision").get<int>();
      entry.rationale = j.at("rationale").get<std::string>();
      entry.previous_item_json = j.at("previous").dump();
      store.update_log.push_back(std::move(entry));
    } else {
      throw Error("unknown store line type: " + type);
    }
  }
  if (!mode_seen) throw Error(path + ": store file missing mode line");
  for (const auto& link : store.links) {
    if (!store.items.count(link.src) || !store.items.count(link.dst))
      throw Error("store link references unknown item");
  }
  return store;
}

}  // namespace memqa
