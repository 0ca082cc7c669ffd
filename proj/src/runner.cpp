#include "memqa/runner.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "memqa/answering.hpp"
#include "memqa/ingestion.hpp"
#include "memqa/organization.hpp"
#include "memqa/providers.hpp"
#include "memqa/retrieval.hpp"
#include "memqa/synth.hpp"

namespace memqa {

using json = nlohmann::ordered_json;

namespace {

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw Error("config key '" + key + "' wants a boolean, got '" + value + "'");
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string trimmed;
    // strip surrounding whitespace
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    trimmed = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trimmed.substr(0, eq);
    const std::string value = trimmed.substr(eq + 1);
    try {
      if (key == "seed") config.seed = std::stoull(value);
      else if (key == "representation") config.representation = value;
      else if (key == "organization") config.organization = value;
      else if (key == "answer_mode") config.answer_mode = value;
      else if (key == "k") config.k = std::stoi(value);
      else if (key == "rerank") config.use_rerank = parse_bool(key, value);
      else if (key == "rerank_candidates") config.rerank_candidates = std::stoi(value);
      else if (key == "hops") config.hops = std::stoi(value);
      else if (key == "max_iters") config.max_iters = std::stoi(value);
      else if (key == "emails") config.emails = std::stoi(value);
      else if (key == "images") config.images = std::stoi(value);
      else if (key == "videos") config.videos = std::stoi(value);
      else if (key == "conflict_pairs") config.conflict_pairs = std::stoi(value);
      else if (key == "qa") config.qa_total = std::stoi(value);
      else if (key == "workers") config.workers = std::stoi(value);
      else if (key == "link_threshold") config.link_threshold = std::stod(value);
      else if (key == "link_candidate_k") config.link_candidate_k = std::stoi(value);
      else if (key == "updates") config.apply_updates = parse_bool(key, value);
      else if (key == "out_dir") config.out_dir = value;
      else throw Error("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw Error("config key '" + key + "': bad value '" + value + "'");
    }
  }
  if (config.representation != "dm" && config.representation != "sgm")
    throw Error("representation must be dm or sgm");
  if (config.organization != "piled" && config.organization != "linked")
    throw Error("organization must be piled or linked");
  answer_mode_from_name(config.answer_mode);  // validates
  if (config.k < 1) throw Error("k must be >= 1");
  if (config.max_iters < 1) throw Error("max_iters must be >= 1");
  return config;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  return parse(read_text_file(path));
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "seed=" << seed << '\n'
      << "representation=" << representation << '\n'
      << "organization=" << organization << '\n'
      << "answer_mode=" << answer_mode << '\n'
      << "k=" << k << '\n'
      << "rerank=" << (use_rerank ? 1 : 0) << '\n'
      << "rerank_candidates=" << rerank_candidates << '\n'
      << "hops=" << hops << '\n'
      << "max_iters=" << max_iters << '\n'
      << "emails=" << emails << '\n'
      << "images=" << images << '\n'
      << "videos=" << videos << '\n'
      << "conflict_pairs=" << conflict_pairs << '\n'
      << "qa=" << qa_total << '\n'
      << "workers=" << workers << '\n'
      << "link_threshold=" << link_threshold << '\n'
      << "link_candidate_k=" << link_candidate_k << '\n'
      << "updates=" << (apply_updates ? 1 : 0) << '\n'
      << "out_dir=" << out_dir << '\n';
  return out.str();
}

std::string RunManifest::to_json() const {
  json j;
  j["config"] = config;
  j["stage_seconds"] = stage_seconds;
  j["encoding_seconds"] = encoding_seconds;
  j["output_digests"] = output_digests;
  return j.dump(2);
}

RunResult run_experiment(const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(config.out_dir) / name).string();
  };

  RunManifest manifest;
  {
    std::istringstream in(config.to_text());
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      manifest.config[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  const auto timed = [&](const char* stage, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      throw Error(std::string("stage ") + stage + " failed: " + e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    manifest.stage_seconds[stage] = dt.count();
  };

  ProviderConfig provider;
  provider.seed = config.seed;
  auto embedder = make_embedder(provider);
  auto chat = make_chat_provider(provider);
  auto geocoder = make_geocoder(provider);
  const Schema schema = Schema::defaults();

  std::vector<RawRecord> corpus;
  std::vector<QAInstance> qas;
  timed("synth", [&] {
    SynthConfig sizes;
    sizes.emails = config.emails;
    sizes.images = config.images;
    sizes.videos = config.videos;
    const QaCounts counts = default_qa_counts(config.qa_total);
    sizes.conflict_pairs = config.conflict_pairs >= 0
                               ? config.conflict_pairs
                               : std::max(config.emails / 10, counts.mut);
    WorldModel world;
    std::tie(corpus, world) = generate_corpus(config.seed, sizes);
    qas = generate_qa(world, counts);
    write_corpus(path("corpus.jsonl"), corpus);
    write_qa_file(path("qa.jsonl"), qas);
  });

  MemoryStore store;
  timed("ingest", [&] {
    const MemoryKind kind =
        config.representation == "dm" ? MemoryKind::dm : MemoryKind::sgm;
    auto items = ingest_corpus(corpus, kind, schema, *chat, *geocoder,
                               config.workers);
    write_memory_file(path("memory.jsonl"), items);
    store = build_piled(items);
  });

  if (config.organization == "linked") {
    timed("link", [&] {
      store = build_links(std::move(store), *chat, *embedder,
                          config.link_threshold, config.link_candidate_k);
      if (config.apply_updates) store = apply_updates(std::move(store), *chat, schema);
    });
  }
  timed("store", [&] { write_store(path("store.mem"), store); });

  VectorIndex index;
  timed("index", [&] {
    index = build_index(store, *embedder, Metric::cosine);
    write_index(path("index.bin"), index);
  });

  for (const char* stage : {"ingest", "link", "store", "index"}) {
    auto it = manifest.stage_seconds.find(stage);
    if (it != manifest.stage_seconds.end()) manifest.encoding_seconds += it->second;
  }

  std::vector<Prediction> preds;
  timed("answer", [&] {
    const AnswerMode mode = answer_mode_from_name(config.answer_mode);
    RetrieveConfig rc;
    rc.k = config.k;
    rc.use_rerank = config.use_rerank;
    rc.rerank_candidates = config.rerank_candidates;
    rc.hops = config.hops;
    preds = answer_questions(qas, store, index, *embedder, *chat, mode, rc,
                             config.max_iters);
    write_pred_file(path("pred.jsonl"), preds);
  });

  RunResult result;
  timed("evaluate", [&] {
    auto records = evaluate_all(qas, preds, config.k, *chat);
    write_eval_file(path("eval.jsonl"), records);
    result.report = aggregate_report(records, qas, config.k);
    result.report_text = report_to_text(result.report);
    write_text_file(path("report.txt"), result.report_text);
    write_text_file(path("report.json"), report_to_json(result.report));
  });

  for (const char* name : {"corpus.jsonl", "qa.jsonl", "memory.jsonl", "store.mem",
                           "index.bin", "pred.jsonl", "eval.jsonl", "report.txt",
                           "report.json"}) {
    manifest.output_digests[name] = file_digest(path(name));
  }
  write_text_file(path("manifest.json"), manifest.to_json());
  result.manifest = std::move(manifest);
  return result;
}

}  // namespace memqa
