// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memqa/answering.hpp"
#include "memqa/evaluation.hpp"
#include "memqa/ingestion.hpp"
#include "memqa/organization.hpp"
#include "memqa/providers.hpp"
#include "memqa/retrieval.hpp"
#include "memqa/runner.hpp"
#include "memqa/synth.hpp"
#include "memqa/textutil.hpp"

using namespace memqa;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const char* name, bool ok, double seconds) {
  std::printf("[%s] criterion %d: %-38s (%.2fs)\n", ok ? "PASS" : "FAIL", number,
              name, seconds);
  if (!ok) ++g_failures;
}

template <typename Fn>
void criterion(int number, const char* name, double budget_seconds, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = fn();
  } catch (const std::exception& e) {
    std::printf("       criterion %d threw: %s\n", number, e.what());
    ok = false;
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  if (budget_seconds > 0 && dt.count() >= budget_seconds) {
    std::printf("       criterion %d over budget: %.2fs >= %.2fs\n", number,
                dt.count(), budget_seconds);
    ok = false;
  }
  report(number, name, ok, dt.count());
}

// The frozen directional-check configuration: exactly 500 records.
RunConfig acceptance_config(const std::string& out_dir) {
  RunConfig config;
  config.seed = 42;
  config.emails = 60;
  config.images = 350;
  config.videos = 90;
  config.conflict_pairs = 15;
  config.qa_total = 100;
  config.out_dir = out_dir;
  return config;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// --- criterion 1: metric oracle equivalence --------------------------------

bool metric_oracle_equivalence() {
  std::mt19937_64 rng(42);
  // alphabet chosen so independent normalization is the identity
  const std::vector<std::string> words = {"kite", "lamp", "pier", "moss", "dune",
                                          "fern", "clay", "reef", "wren", "vale"};
  auto random_list = [&](std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(words[rng() % words.size()]);
    return out;
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& w : v) s += (s.empty() ? "" : ", ") + w;
    return s;
  };

  for (int trial = 0; trial < 1000; ++trial) {
    // exact match on plain words: oracle is string equality of the word
    const std::string g = words[rng() % words.size()];
    const std::string p = words[rng() % words.size()];
    if (exact_match(g, p) != (g == p ? 1 : 0)) return false;
    // currency symbols and separators normalize away on number answers
    if (exact_match("€842.97", "842.97") != 1) return false;
    if (exact_match("1,000", "1000") != 1) return false;
    if (exact_match("842.97", "853.26") != 0) return false;

    // jaccard against an independent set computation
    const auto gl = random_list(rng() % 6);
    const auto pl = random_list(rng() % 6);
    const std::set<std::string> gs(gl.begin(), gl.end());
    const std::set<std::string> ps(pl.begin(), pl.end());
    std::set<std::string> inter, uni(gs.begin(), gs.end());
    for (const auto& w : ps) {
      if (gs.count(w)) inter.insert(w);
      uni.insert(w);
    }
    const double expect_j =
        uni.empty() ? 1.0
                    : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    if (jaccard(join(gl), join(pl)) != expect_j) return false;

    // recall / recall_gt / joint against brute force
    std::set<std::string> gold;
    const std::size_t gold_n = rng() % 6;
    while (gold.size() < gold_n) gold.insert("id-" + std::to_string(rng() % 30));
    std::vector<std::string> retrieved;
    for (std::size_t i = 0, n = rng() % 16; i < n; ++i)
      retrieved.push_back("id-" + std::to_string(rng() % 30));
    const int k = 1 + static_cast<int>(rng() % 12);
    auto oracle_recall = [&](std::size_t cutoff) {
      if (gold.empty()) return 1.0;
      std::set<std::string> top(retrieved.begin(),
                                retrieved.begin() + std::min(retrieved.size(), cutoff));
      std::size_t hit = 0;
      for (const auto& id : gold) hit += top.count(id);
      return static_cast<double>(hit) / static_cast<double>(gold.size());
    };
    const double r = recall_at_k(gold, retrieved, k);
    if (r != oracle_recall(static_cast<std::size_t>(k))) return false;
    if (recall_at_k_gt(gold, retrieved) != oracle_recall(gold.size())) return false;
    const double q = static_cast<double>(rng() % 4) / 3.0;
    if (std::abs(joint_at_k(q, r) - q * r) > 1e-12) return false;
  }
  return true;
}

// --- criterion 2: retrieval exactness --------------------------------------

bool retrieval_exactness() {
  std::mt19937_64 rng(42);
  const int dim = 64;
  for (int corpus = 0; corpus < 50; ++corpus) {
    const std::size_t n = 100 + rng() % 4901;  // up to 5,000
    const bool ties = corpus % 3 == 0;         // coarse grid forces exact ties
    const Metric metric = corpus % 2 ? Metric::cosine : Metric::dot;

    VectorIndex index;
    index.metric = metric;
    index.dim = dim;
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::uniform_int_distribution<int> coarse(-1, 1);
    for (std::size_t i = 0; i < n; ++i) {
      char id[16];
      std::snprintf(id, sizeof(id), "it-%05zu", i);
      index.ids.emplace_back(id);
      for (int d = 0; d < dim; ++d)
        index.matrix.push_back(ties ? static_cast<float>(coarse(rng)) : dist(rng));
    }
    if (metric == Metric::cosine) {
      for (std::size_t i = 0; i < n; ++i) {
        float* row = index.matrix.data() + i * dim;
        double norm = 0;
        for (int d = 0; d < dim; ++d) norm += static_cast<double>(row[d]) * row[d];
        const float inv = norm > 0 ? static_cast<float>(1.0 / std::sqrt(norm)) : 0.0f;
        for (int d = 0; d < dim; ++d) row[d] *= inv;
      }
    }

    for (int q = 0; q < 3; ++q) {
      EmbeddingVector query;
      for (int d = 0; d < dim; ++d)
        query.values.push_back(ties ? static_cast<float>(coarse(rng)) : dist(rng));
      const int k = 1 + static_cast<int>(rng() % 50);

      const EmbeddingVector qv =
          metric == Metric::cosine ? query.normalized() : query;
      std::vector<std::pair<float, std::string>> scored;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0;
        for (int d = 0; d < dim; ++d)
          s += static_cast<double>(index.row(i)[d]) * qv.values[d];
        scored.emplace_back(static_cast<float>(s), index.ids[i]);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      const auto got = search_vector(index, query, k).ids();
      if (got.size() != std::min<std::size_t>(k, n)) return false;
      for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i] != scored[i].second) return false;
      }
    }
  }
  return true;
}

// --- criterion 3: joint bound ----------------------------------------------

bool joint_bound() {
  TempDir dir("memqa_accept_joint");
  run_experiment(acceptance_config(dir.path.string()));
  const auto records = read_eval_file((dir.path / "eval.jsonl").string());
  if (records.size() != 100) return false;
  for (const auto& rec : records) {
    if (rec.joint_at_k > std::min(rec.qs, rec.recall_at_k) + 1e-12) return false;
  }
  return true;
}

// --- criterion 4: SGM vs DM directional check ------------------------------

bool sgm_vs_dm_directional() {
  TempDir dm_dir("memqa_accept_dm");
  TempDir sgm_dir("memqa_accept_sgm");
  RunConfig dm_config = acceptance_config(dm_dir.path.string());
  dm_config.representation = "dm";
  RunConfig sgm_config = acceptance_config(sgm_dir.path.string());
  sgm_config.representation = "sgm";

  const auto dm = run_experiment(dm_config);
  const auto sgm = run_experiment(sgm_config);

  const auto corpus = read_corpus((dm_dir.path / "corpus.jsonl").string());
  if (corpus.size() != 500) return false;

  std::printf("       DM  QS %.1f  R@10 %.1f\n", dm.report.qs_percent,
              dm.report.recall_percent);
  std::printf("       SGM QS %.1f  R@10 %.1f\n", sgm.report.qs_percent,
              sgm.report.recall_percent);
  return sgm.report.recall_percent >= dm.report.recall_percent &&
         sgm.report.qs_percent >= dm.report.qs_percent;
}

// --- criterion 5: MUT mechanism check --------------------------------------

bool mut_mechanism() {
  SynthConfig sizes;
  sizes.emails = 30;
  sizes.images = 30;
  sizes.videos = 10;
  sizes.conflict_pairs = 10;
  const auto [corpus, world] = generate_corpus(42, sizes);
  QaCounts counts;
  counts.mut = 10;
  const auto qas = generate_qa(world, counts);
  if (qas.size() != 10 || world.conflicts.size() != 10) return false;

  MockChatProvider chat(42);
  MockEmbedder embedder(42);
  MockGeocoder geo;
  const Schema schema = Schema::defaults();
  const auto items = ingest_corpus(corpus, MemoryKind::sgm, schema, chat, geo, 1);

  MemoryStore plain = build_piled(items);
  MemoryStore updated =
      apply_updates(build_links(build_piled(items), chat, embedder, 0.3, 24), chat,
                    schema);

  // the update pass must actually revise the booking items
  int revised = 0;
  for (const auto& [id, item] : updated.items) revised += item.revision > 0;
  if (revised != 10) return false;

  // scripted answerer: read the amount from the highest-revision gold item,
  // ties broken toward the earliest record
  auto scripted_answer = [](const MemoryStore& store, const QAInstance& qa) {
    const MemoryItem* pick = nullptr;
    for (const auto& id : qa.gold_evidence) {
      const MemoryItem& item = store.item(id);
      if (!pick || item.revision > pick->revision ||
          (item.revision == pick->revision && item.timestamp < pick->timestamp))
        pick = &item;
    }
    const std::string render = render_item(*pick);
    // a revised item carries a supersede note naming the final amount
    const auto note = render.rfind("final amount ");
    const std::string scope =
        note == std::string::npos ? render : render.substr(note);
    const auto amounts = text::extract_amounts(scope);
    return amounts.empty() ? std::string("Unknown") : amounts.front();
  };

  for (const auto& qa : qas) {
    // after apply_updates the revised booking carries the final amount
    if (qs(qa, scripted_answer(updated, qa), chat) != 1.0) return false;
    // with updates disabled the earliest item still shows the stale amount
    if (qs(qa, scripted_answer(plain, qa), chat) != 0.0) return false;
  }
  return true;
}

// --- criterion 6: abstention -----------------------------------------------

bool abstention() {
  SynthConfig sizes;
  sizes.emails = 20;
  sizes.images = 30;
  sizes.videos = 10;
  sizes.conflict_pairs = 3;
  const auto [corpus, world] = generate_corpus(42, sizes);
  QaCounts counts;
  counts.abs = 10;
  counts.pr = 10;  // non-ABS control questions
  const auto qas = generate_qa(world, counts);

  MockChatProvider chat(42);
  for (const auto& qa : qas) {
    const auto trace =
        answer_single_pass(qa.question, {}, chat, AnswerMode::no_evidence);
    const bool is_abs = qa.gold_evidence.empty();
    if (is_abs) {
      if (trace.final != "Unknown") return false;
      if (qs(qa, trace.final, chat) != 1.0) return false;  // judge rule d
    } else {
      if (qs(qa, trace.final, chat) != 0.0) return false;
    }
  }
  return true;
}

// --- criterion 7: agentic contract -----------------------------------------

bool agentic_contract() {
  // part 1: a perpetually rewriting critic stops at exactly max_iters
  std::vector<MemoryItem> items;
  for (int i = 0; i < 12; ++i) {
    MemoryItem item;
    item.id = "it-" + std::to_string(i);
    item.kind = MemoryKind::dm;
    item.text = "note number " + std::to_string(i);
    item.source = Source::image;
    item.timestamp = Timestamp::parse("2020-01-01T12:00Z");
    items.push_back(std::move(item));
  }
  MemoryStore store = build_piled(items);
  MockEmbedder embedder(42);
  const VectorIndex index = build_index(store, embedder, Metric::cosine);

  ScriptedChatProvider scripted;
  scripted.add_rule("sufficiency", "Question:", {"REWRITE: keep looking"});
  scripted.add_rule("answerer", "Question:", {"Unknown"});
  for (int max_iters : {1, 2, 3, 7}) {
    AgenticConfig config;
    config.retrieve.k = 5;
    config.max_iters = max_iters;
    const auto trace =
        answer_agentic("note number 3", store, index, embedder, scripted, config);
    if (trace.iterations.size() != static_cast<std::size_t>(max_iters)) return false;
  }

  // part 2: max_iters=1 is byte-identical to single-pass on 100 questions
  SynthConfig sizes;
  sizes.emails = 60;
  sizes.images = 350;
  sizes.videos = 90;
  sizes.conflict_pairs = 15;
  const auto [corpus, world] = generate_corpus(42, sizes);
  const auto qas = generate_qa(world, default_qa_counts(100));
  MockChatProvider chat(42);
  MockGeocoder geo;
  const MemoryStore full = build_piled(
      ingest_corpus(corpus, MemoryKind::sgm, Schema::defaults(), chat, geo, 1));
  const VectorIndex full_index = build_index(full, embedder, Metric::cosine);
  RetrieveConfig rc;
  rc.k = 10;

  const auto single = answer_questions(qas, full, full_index, embedder, chat,
                                       AnswerMode::single_pass, rc, 3);
  const auto agentic = answer_questions(qas, full, full_index, embedder, chat,
                                        AnswerMode::agentic, rc, /*max_iters=*/1);
  std::string a, b;
  for (const auto& p : single) a += prediction_to_json(p) + "\n";
  for (const auto& p : agentic) b += prediction_to_json(p) + "\n";
  return a == b;
}

// --- criterion 8: recall monotonicity + prompt golden files ----------------

bool monotonicity_and_goldens() {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<std::string> gold;
    while (gold.size() < rng() % 5) gold.insert("g-" + std::to_string(rng() % 20));
    std::vector<std::string> retrieved;
    for (std::size_t i = 0, n = rng() % 15; i < n; ++i)
      retrieved.push_back("g-" + std::to_string(rng() % 20));
    double prev = 0.0;
    for (int k = 1; k <= 15; ++k) {
      const double r = recall_at_k(gold, retrieved, k);
      if (r + 1e-15 < prev) return false;
      prev = r;
    }
  }

  const char* root = std::getenv("MEMQA_SOURCE_DIR");
  if (!root) return false;
  const std::string golden_dir = std::string(root) + "/tests/golden/";

  MemoryItem dm;
  dm.kind = MemoryKind::dm;
  dm.id = "im-0001";
  dm.text =
      "im-0001, On Jan 1st, 2020 afternoon, I was at Scotiabank Arena, "
      "watching ice hockey match";
  MemoryItem sgm;
  sgm.kind = MemoryKind::sgm;
  sgm.id = "im-0002";
  sgm.fields = {{"id", "im-0002"}, {"time", "2020-01-01 15:00"}, {"tags", "sports, event"}};
  if (render_answer_prompt("Where was the dinner with Alex?", {dm, sgm}) !=
      read_text_file(golden_dir + "answer_prompt.txt"))
    return false;
  return render_judge_prompt("Where was I?", "Covent Garden", "Covent Garden") ==
         read_text_file(golden_dir + "judge_prompt.txt");
}

// --- criterion 9: end-to-end determinism -----------------------------------

bool end_to_end_determinism() {
  TempDir a("memqa_accept_det_a");
  TempDir b("memqa_accept_det_b");
  const auto ra = run_experiment(acceptance_config(a.path.string()));
  const auto rb = run_experiment(acceptance_config(b.path.string()));
  return ra.manifest.output_digests == rb.manifest.output_digests &&
         !ra.manifest.output_digests.empty();
}

}  // namespace

int main() {
  criterion(1, "metric oracle equivalence", 5.0, metric_oracle_equivalence);
  criterion(2, "retrieval exactness vs brute force", 30.0, retrieval_exactness);
  criterion(3, "joint bound on a 100-question run", 0.0, joint_bound);
  criterion(4, "SGM >= DM on QS and Recall@10", 60.0, sgm_vs_dm_directional);
  criterion(5, "memory update mechanism switch", 0.0, mut_mechanism);
  criterion(6, "abstention scoring", 0.0, abstention);
  criterion(7, "agentic iteration contract", 0.0, agentic_contract);
  criterion(8, "recall monotonicity + prompt goldens", 0.0, monotonicity_and_goldens);
  criterion(9, "end-to-end determinism", 0.0, end_to_end_determinism);

  if (g_failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
