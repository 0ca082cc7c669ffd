#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "memqa/answering.hpp"
#include "memqa/evaluation.hpp"
#include "memqa/ingestion.hpp"
#include "memqa/providers.hpp"
#include "memqa/synth.hpp"

using namespace memqa;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.emails = 12;
  c.images = 16;
  c.videos = 6;
  c.conflict_pairs = 3;
  return c;
}

std::string serialize(const std::vector<RawRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r) + "\n";
  return out;
}

}  // namespace

TEST_CASE("generation is byte-identical across calls and differs across seeds") {
  const auto [c1, w1] = generate_corpus(42, small());
  const auto [c2, w2] = generate_corpus(42, small());
  CHECK(serialize(c1) == serialize(c2));
  CHECK(w1.seed == w2.seed);

  std::string q1, q2;
  for (const auto& qa : generate_qa(w1, default_qa_counts(20))) q1 += qa_to_json(qa) + "\n";
  for (const auto& qa : generate_qa(w2, default_qa_counts(20))) q2 += qa_to_json(qa) + "\n";
  CHECK(q1 == q2);

  const auto [c3, w3] = generate_corpus(7, small());
  CHECK(serialize(c1) != serialize(c3));
}

TEST_CASE("record counts match the configured budgets exactly") {
  const auto [corpus, world] = generate_corpus(42, small());
  int images = 0, videos = 0, emails = 0;
  for (const auto& r : corpus) {
    if (r.source == Source::image) ++images;
    if (r.source == Source::video) ++videos;
    if (r.source == Source::email) ++emails;
  }
  CHECK(images == 16);
  CHECK(videos == 6);
  CHECK(emails == 12);  // recaps plus two emails per conflict pair
  CHECK(world.conflicts.size() == 3);

  SynthConfig tiny;
  tiny.emails = tiny.images = tiny.videos = 1;
  tiny.conflict_pairs = 0;
  const auto [mini, mini_world] = generate_corpus(1, tiny);
  CHECK(mini.size() == 3);
}

TEST_CASE("every record validates and ids are unique and sorted") {
  const auto [corpus, world] = generate_corpus(42, small());
  std::set<std::string> ids;
  for (const auto& r : corpus) {
    CHECK_NOTHROW(validate_record(r));
    CHECK(ids.insert(r.id).second);
  }
  for (std::size_t i = 1; i < corpus.size(); ++i)
    CHECK(corpus[i - 1].id < corpus[i].id);
}

TEST_CASE("event invariants: unique keys, gazetteer places, ordered days") {
  const auto [corpus, world] = generate_corpus(42, small());
  std::set<std::pair<std::string, std::string>> kind_place, kind_person;
  std::set<std::string> gazetteer;
  for (const auto& p : world.places) gazetteer.insert(p.name);
  for (const auto& e : world.events) {
    CHECK(kind_place.insert({e.kind, e.place}).second);
    for (const auto& person : e.participants)
      CHECK(kind_person.insert({e.kind, person}).second);
    CHECK(gazetteer.count(e.place) == 1);
  }
  for (std::size_t i = 1; i < world.events.size(); ++i)
    CHECK(world.events[i - 1].start < world.events[i].start);
}

TEST_CASE("synthetic gps resolves through the mock geocoder") {
  const auto [corpus, world] = generate_corpus(42, small());
  MockGeocoder geo;
  for (const auto& r : corpus) {
    if (!r.gps) continue;
    const std::string place = geo.geocode(r.gps->lat, r.gps->lon);
    CHECK(place != "");
  }
}

TEST_CASE("conflict pairs: booking strictly earlier, shared REF, amounts differ") {
  const auto [corpus, world] = generate_corpus(42, small());
  std::map<std::string, const RawRecord*> by_id;
  for (const auto& r : corpus) by_id[r.id] = &r;
  REQUIRE(world.conflicts.size() == 3);
  for (const auto& c : world.conflicts) {
    const RawRecord& booking = *by_id.at(c.booking_id);
    const RawRecord& invoice = *by_id.at(c.invoice_id);
    CHECK(booking.timestamp < invoice.timestamp);
    CHECK(c.booked_amount != c.final_amount);
    REQUIRE(booking.email_fields.has_value());
    REQUIRE(invoice.email_fields.has_value());
    CHECK(booking.email_fields->body.find(c.reference) != std::string::npos);
    CHECK(invoice.email_fields->body.find(c.reference) != std::string::npos);
    CHECK(booking.email_fields->body.find(c.booked_amount) != std::string::npos);
    CHECK(invoice.email_fields->body.find(c.final_amount) != std::string::npos);
  }
}

TEST_CASE("qa counts follow the requested mix") {
  const QaCounts c = default_qa_counts(100);
  CHECK(c.me == 30);
  CHECK(c.pr == 20);
  CHECK(c.la == 20);
  CHECK(c.mut == 15);
  CHECK(c.abs == 15);
  CHECK(c.total() == 100);
  CHECK(default_qa_counts(7).total() == 7);
  CHECK_THROWS_AS(default_qa_counts(0), Error);
}

TEST_CASE("gold answers come from the world model") {
  const auto [corpus, world] = generate_corpus(42, small());
  const auto qas = generate_qa(world, default_qa_counts(20));
  REQUIRE(qas.size() == 20);

  std::map<std::string, const RawRecord*> by_id;
  for (const auto& r : corpus) by_id[r.id] = &r;

  for (const auto& qa : qas) {
    for (const auto& id : qa.gold_evidence) CHECK(by_id.count(id) == 1);
    if (qa.id.rfind("qa-mut-", 0) == 0) {
      CHECK(qa.qtype == QType::number);
      CHECK(qa.gold_evidence.size() == 2);
      // gold is the later invoice's amount, not the booking's
      bool found = false;
      for (const auto& c : world.conflicts) {
        if (qa.gold_answer == "€" + c.final_amount) found = true;
        CHECK(qa.gold_answer != "€" + c.booked_amount);
      }
      CHECK(found);
    } else if (qa.id.rfind("qa-me-", 0) == 0) {
      std::set<Source> sources;
      for (const auto& id : qa.gold_evidence) sources.insert(by_id.at(id)->source);
      CHECK(sources.size() >= 2);
    } else if (qa.id.rfind("qa-abs-", 0) == 0) {
      CHECK(qa.gold_answer == "I don't know");
      CHECK(qa.gold_evidence.empty());
      CHECK(qa.qtype == QType::open_end);
    }
  }
}

TEST_CASE("over-budget abilities fail naming the ability") {
  const auto [corpus, world] = generate_corpus(42, small());
  QaCounts counts;
  counts.mut = 50;  // only 3 conflicts exist
  try {
    generate_qa(world, counts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("MUT") != std::string::npos);
  }
}

TEST_CASE("gold evidence plus the mock answerer scores QS 1") {
  SynthConfig config;
  config.emails = 20;
  config.images = 30;
  config.videos = 10;
  config.conflict_pairs = 6;
  const auto [corpus, world] = generate_corpus(42, config);
  const auto qas = generate_qa(world, default_qa_counts(40));

  MockChatProvider chat(42);
  MockGeocoder geo;
  const auto store = build_piled(
      ingest_corpus(corpus, MemoryKind::sgm, Schema::defaults(), chat, geo, 1));

  for (const auto& qa : qas) {
    std::vector<MemoryItem> evidence;
    for (const auto& id : qa.gold_evidence) evidence.push_back(store.item(id));
    const auto trace = answer_single_pass(qa.question, evidence, chat,
                                          AnswerMode::oracle);
    if (qa.gold_evidence.empty()) {
      CHECK(trace.final == "Unknown");
    }
    INFO("qa ", qa.id, " question ", qa.question, " -> ", trace.final);
    CHECK(qs(qa, trace.final, chat) == doctest::Approx(1.0));
  }
}
