#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include <memqa.h>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const char* name) const { return (path / name).string(); }
};

std::string take(char* s) {
  REQUIRE(s != nullptr);
  std::string out(s);
  memqa_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("version string is present") {
  REQUIRE(memqa_version() != nullptr);
  CHECK(std::strlen(memqa_version()) > 0);
}

TEST_CASE("null arguments yield MEMQA_ERR_INVALID_ARGUMENT with a message") {
  CHECK(memqa_synth(42, 5, 5, 2, 0, 5, nullptr, "qa.jsonl") ==
        MEMQA_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(memqa_last_error()) > 0);
  CHECK(memqa_ingest(nullptr, "sgm", nullptr, 42, 1, "out") ==
        MEMQA_ERR_INVALID_ARGUMENT);
  CHECK(memqa_query("idx", nullptr, nullptr, 5, 0, 0, 0, 42, nullptr) ==
        MEMQA_ERR_INVALID_ARGUMENT);
  CHECK(memqa_run(nullptr, nullptr) == MEMQA_ERR_INVALID_ARGUMENT);
  CHECK(memqa_engine_open(nullptr, "idx", 42, nullptr) ==
        MEMQA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("runtime failures carry a message and the right status") {
  CHECK(memqa_ingest("/nonexistent/corpus.jsonl", "sgm", nullptr, 42, 1,
                     "/tmp/memqa_capi_never.jsonl") == MEMQA_ERR_RUNTIME);
  CHECK(std::strlen(memqa_last_error()) > 0);

  TempDir dir("memqa_capi_badargs");
  REQUIRE(memqa_synth(42, 5, 6, 2, 1, 5, dir.file("corpus.jsonl").c_str(),
                      dir.file("qa.jsonl").c_str()) == MEMQA_OK);
  CHECK(memqa_ingest(dir.file("corpus.jsonl").c_str(), "verbose", nullptr, 42, 1,
                     dir.file("memory.jsonl").c_str()) == MEMQA_ERR_RUNTIME);
  CHECK(memqa_index(dir.file("corpus.jsonl").c_str(), "euclidean", 42,
                    dir.file("index.bin").c_str()) == MEMQA_ERR_RUNTIME);
}

TEST_CASE("the whole pipeline runs through the C API") {
  TempDir dir("memqa_capi_pipeline");
  REQUIRE(memqa_synth(42, 12, 16, 6, 3, 20, dir.file("corpus.jsonl").c_str(),
                      dir.file("qa.jsonl").c_str()) == MEMQA_OK);
  REQUIRE(memqa_ingest(dir.file("corpus.jsonl").c_str(), "sgm", nullptr, 42, 2,
                       dir.file("memory.jsonl").c_str()) == MEMQA_OK);
  REQUIRE(memqa_link(dir.file("memory.jsonl").c_str(), 0.6, 8, 1, 42,
                     dir.file("store.mem").c_str()) == MEMQA_OK);
  REQUIRE(memqa_index(dir.file("store.mem").c_str(), "cosine", 42,
                      dir.file("index.bin").c_str()) == MEMQA_OK);

  char* ids_json = nullptr;
  REQUIRE(memqa_query(dir.file("index.bin").c_str(), dir.file("store.mem").c_str(),
                      "dinner with Alex", 5, 0, 0, 1, 42, &ids_json) == MEMQA_OK);
  const auto hits = nlohmann::json::parse(take(ids_json));
  REQUIRE(hits.is_array());
  CHECK(hits.size() == 5);
  CHECK(hits[0].contains("id"));
  CHECK(hits[0].contains("score"));

  REQUIRE(memqa_answer(dir.file("index.bin").c_str(), dir.file("store.mem").c_str(),
                       dir.file("qa.jsonl").c_str(), "single", 10, 3, 0, 0, 0, 42,
                       dir.file("pred.jsonl").c_str()) == MEMQA_OK);
  CHECK(fs::exists(dir.file("pred.jsonl")));

  char* report = nullptr;
  REQUIRE(memqa_evaluate(dir.file("qa.jsonl").c_str(), dir.file("pred.jsonl").c_str(),
                         10, "mock", nullptr, 42, dir.file("eval.jsonl").c_str(),
                         dir.file("report.json").c_str(), &report) == MEMQA_OK);
  const std::string text = take(report);
  CHECK(text.find("Joint@10") != std::string::npos);
  CHECK(fs::exists(dir.file("eval.jsonl")));
  CHECK(fs::exists(dir.file("report.json")));
}

TEST_CASE("memqa_run_text executes a config end to end") {
  TempDir dir("memqa_capi_run");
  const std::string config =
      "seed=42\nemails=12\nimages=16\nvideos=6\nconflict_pairs=3\nqa=20\n"
      "out_dir=" + dir.file("run") + "\n";
  char* report = nullptr;
  REQUIRE(memqa_run_text(config.c_str(), &report) == MEMQA_OK);
  CHECK(take(report).find("questions") != std::string::npos);
  CHECK(fs::exists(dir.file("run") + "/manifest.json"));

  CHECK(memqa_run_text("nonsense\n", &report) == MEMQA_ERR_RUNTIME);
}

TEST_CASE("memqa_run reads the config from a file") {
  TempDir dir("memqa_capi_runfile");
  const std::string config_path = dir.file("exp.conf");
  {
    FILE* f = std::fopen(config_path.c_str(), "w");
    REQUIRE(f != nullptr);
    std::fprintf(f,
                 "seed=42\nemails=12\nimages=16\nvideos=6\nconflict_pairs=3\n"
                 "qa=20\nout_dir=%s\n", dir.file("run").c_str());
    std::fclose(f);
  }
  char* report = nullptr;
  REQUIRE(memqa_run(config_path.c_str(), &report) == MEMQA_OK);
  CHECK(!take(report).empty());
}

TEST_CASE("engine handle answers repeated queries") {
  TempDir dir("memqa_capi_engine");
  REQUIRE(memqa_synth(42, 8, 10, 4, 2, 10, dir.file("corpus.jsonl").c_str(),
                      dir.file("qa.jsonl").c_str()) == MEMQA_OK);
  REQUIRE(memqa_ingest(dir.file("corpus.jsonl").c_str(), "dm", nullptr, 42, 1,
                       dir.file("memory.jsonl").c_str()) == MEMQA_OK);
  REQUIRE(memqa_index(dir.file("memory.jsonl").c_str(), "cosine", 42,
                      dir.file("index.bin").c_str()) == MEMQA_OK);

  memqa_engine* engine = nullptr;
  REQUIRE(memqa_engine_open(dir.file("memory.jsonl").c_str(),
                            dir.file("index.bin").c_str(), 42, &engine) == MEMQA_OK);
  REQUIRE(engine != nullptr);
  for (const char* q : {"hike with Riley", "concert tickets", "museum"}) {
    char* ids_json = nullptr;
    REQUIRE(memqa_engine_query(engine, q, 3, 0, 0, 0, &ids_json) == MEMQA_OK);
    const auto hits = nlohmann::json::parse(take(ids_json));
    CHECK(hits.size() == 3);
  }
  CHECK(memqa_engine_query(engine, nullptr, 3, 0, 0, 0, nullptr) ==
        MEMQA_ERR_INVALID_ARGUMENT);
  memqa_engine_close(engine);
  memqa_engine_close(nullptr);  // must be a no-op
}
