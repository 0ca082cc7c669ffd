#include "memqa/ingestion.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "memqa/textutil.hpp"

namespace memqa {

using json = nlohmann::ordered_json;

namespace {

void require_valid(const RawRecord& record) {
  auto errors = validate_record(record);
  if (!errors.empty()) {
    throw Error("invalid record '" + record.id + "': " + errors.front());
  }
}

std::string describe(const RawRecord& record, ChatProvider& describer) {
  std::vector<ChatMessage> messages;
  messages.push_back({"user",
                      "Describe this memory item in one short caption.\n"
                      "Record:\n" + record_to_json(record),
                      {}});
  try {
    return text::trim(describer.chat("describer", messages));
  } catch (const ProviderFailure& e) {
    throw Error("ingestion failed for record '" + record.id + "': " + e.what());
  }
}

}  // namespace

std::string resolve_location(const std::optional<GeoPoint>& gps, Geocoder& geocoder) {
  if (!gps) return "";
  try {
    return geocoder.geocode(gps->lat, gps->lon);
  } catch (const ProviderFailure& e) {
    std::cerr << "warning: geocoding failed: " << e.what() << '\n';
    return "";
  }
}

MemoryItem preprocess_dm(const RawRecord& record, ChatProvider& describer,
                         Geocoder& geocoder) {
  require_valid(record);
  const std::string location = resolve_location(record.gps, geocoder);
  const std::string caption = describe(record, describer);

  std::string text = record.id + ", On " + record.timestamp.to_phrase();
  if (!location.empty()) text += ", I was at " + location;
  if (!caption.empty()) text += ", " + caption;

  MemoryItem item;
  item.id = record.id;
  item.kind = MemoryKind::dm;
  item.text = std::move(text);
  item.source = record.source;
  item.timestamp = record.timestamp;
  return item;
}

MemoryItem preprocess_sgm(const RawRecord& record, ChatProvider& describer,
                          const Schema& schema, Geocoder& geocoder) {
  require_valid(record);
  const auto& keys = schema.for_source(record.source);
  const std::string location = resolve_location(record.gps, geocoder);

  std::string requested;
  for (const auto& k : keys) {
    if (k == "id" || k == "time" || k == "source") continue;
    if (!requested.empty()) requested += ", ";
    requested += k;
  }

  std::vector<ChatMessage> messages;
  messages.push_back({"user",
                      "Extract the memory fields.\n"
                      "Return a strict JSON object with exactly these keys: " + requested + "\n"
                      "Known location: " + location + "\n"
                      "Record:\n" + record_to_json(record),
                      {}});

  json fields_doc;
  std::string failure;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = describer.chat("describer_sgm", messages);
    } catch (const ProviderFailure& e) {
      throw Error("ingestion failed for record '" + record.id + "': " + e.what());
    }
    try {
      json parsed = json::parse(reply);
      if (!parsed.is_object()) throw Error("provider reply is not an object");
      for (const auto& k : keys) {
        if (k == "id" || k == "time" || k == "source") continue;
        if (!parsed.contains(k)) throw Error("missing key '" + k + "'");
      }
      fields_doc = std::move(parsed);
      failure.clear();
      break;
    } catch (const json::exception& e) {
      failure = e.what();
    } catch (const Error& e) {
      failure = e.what();
    }
  }
  if (!failure.empty()) {
    throw Error("ingestion failed for record '" + record.id +
                "': schema-nonconformant describer output: " + failure);
  }

  MemoryItem item;
  item.id = record.id;
  item.kind = MemoryKind::sgm;
  item.source = record.source;
  item.timestamp = record.timestamp;
  for (const auto& k : keys) {
    std::string value;
    if (k == "id") {
      value = record.id;
    } else if (k == "time") {
      value = record.timestamp.to_field_time();
    } else if (k == "source") {
      value = source_name(record.source);
    } else {
      const json& v = fields_doc.at(k);
      if (v.is_string()) {
        value = v.get<std::string>();
      } else if (v.is_array()) {
        for (const auto& e : v) {
          if (!value.empty()) value += ", ";
          value += e.is_string() ? e.get<std::string>() : e.dump();
        }
      } else {
        value = v.dump();
      }
    }
    item.fields.emplace_back(k, std::move(value));
  }
  return item;
}

std::string render_item(const MemoryItem& item) {
  if (item.kind == MemoryKind::dm) return item.text;
  std::string out;
  for (const auto& [k, v] : item.fields) {
    if (!out.empty()) out += '\n';
    out += k + ": " + v;
  }
  return out;
}

std::vector<MemoryItem> ingest_corpus(const std::vector<RawRecord>& corpus,
                                      MemoryKind kind, const Schema& schema,
                                      ChatProvider& describer, Geocoder& geocoder,
                                      int workers) {
  std::set<std::string> ids;
  for (const auto& r : corpus) {
    if (!ids.insert(r.id).second) throw Error("duplicate record id " + r.id);
  }

  std::vector<MemoryItem> items(corpus.size());
  auto process = [&](std::size_t i) {
    items[i] = kind == MemoryKind::dm
                   ? preprocess_dm(corpus[i], describer, geocoder)
                   : preprocess_sgm(corpus[i], describer, schema, geocoder);
  };

  if (workers <= 1 || corpus.size() < 2) {
    for (std::size_t i = 0; i < corpus.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const int n = std::min<int>(workers, static_cast<int>(corpus.size()));
    for (int w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < corpus.size();
             i = next.fetch_add(1)) {
          if (failed.load()) return;
          try {
            process(i);
          } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            failed = true;
            if (error_message.empty()) error_message = e.what();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failed) throw Error(error_message);
  }

  std::sort(items.begin(), items.end(),
            [](const MemoryItem& a, const MemoryItem& b) { return a.id < b.id; });
  return items;
}

}  // namespace memqa
