#include "memqa/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

namespace memqa {

namespace {

struct KindTemplate {
  const char* kind;
  const char* caption;      // {P} participants, {place} place
  const char* tags;
  const char* ocr_label;
  const char* code_prefix;
};

// (kind, place) and (kind, first participant) stay unique per event, so a
// question naming either pair identifies exactly one event.
constexpr KindTemplate kKinds[] = {
    {"dinner", "Group dinner with {P} at {place}", "dinner, food, friends",
     "MENU", "MNU"},
    {"concert", "Concert night with {P} at {place}", "concert, music, live",
     "TICKET", "TCK"},
    {"hike", "Hiking the trail with {P} near {place}", "hike, trail, outdoors",
     "TRAIL MARKER", "TRL"},
    {"match", "Watching the match with {P} at {place}", "match, sports, stadium",
     "SEAT", "SEA"},
    {"museum", "Museum visit with {P} at {place}", "museum, art, exhibit",
     "EXHIBIT", "EXH"},
    {"conference", "Conference day with {P} at {place}", "conference, talks, badge",
     "BADGE", "BDG"},
    {"picnic", "Picnic afternoon with {P} at {place}", "picnic, blanket, snacks",
     "BASKET", "BSK"},
};
constexpr int kKindCount = 7;

const std::vector<std::string>& people_roster() {
  static const std::vector<std::string> roster = {"Alex",  "Jordan", "Sam",
                                                  "Grace", "Riley",  "Maya"};
  return roster;
}

// Matches the offline geocoder's gazetteer, so records geocode cleanly.
const std::vector<SynthPlace>& place_gazetteer() {
  static const std::vector<SynthPlace> places = {
      {"Scotiabank Arena", 43.64, -79.38}, {"Porto Old Town", 41.15, -8.61},
      {"Sligo Harbour", 54.27, -8.47},     {"Covent Garden", 51.51, -0.13},
      {"Le Marais", 48.86, 2.35},          {"Tokyo Station", 35.68, 139.77},
      {"Central Park", 40.78, -73.97},     {"Parker's Piece", 52.20, 0.12},
      {"Piazza San Marco", 45.44, 12.33},  {"Circular Quay", -33.86, 151.21},
  };
  return places;
}

const KindTemplate& kind_template(const std::string& kind) {
  for (const auto& k : kKinds) {
    if (kind == k.kind) return k;
  }
  throw Error("unknown event kind: " + kind);
}

std::string participants_phrase(const std::vector<std::string>& people) {
  std::string out;
  for (std::size_t i = 0; i < people.size(); ++i) {
    if (i > 0) out += i + 1 == people.size() ? " and " : ", ";
    out += people[i];
  }
  return out;
}

std::string fill(std::string tmpl, const std::string& marker, const std::string& v) {
  std::size_t pos;
  while ((pos = tmpl.find(marker)) != std::string::npos)
    tmpl.replace(pos, marker.size(), v);
  return tmpl;
}

std::string event_caption(const SynthEvent& e) {
  std::string s = kind_template(e.kind).caption;
  s = fill(std::move(s), "{P}", participants_phrase(e.participants));
  return fill(std::move(s), "{place}", e.place);
}

std::string timestamp_digits(const Timestamp& ts) {
  std::string out;
  for (char c : ts.to_field_time()) {
    if (c >= '0' && c <= '9') out += c;
  }
  return out;
}

std::string format_cents(long long cents) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld", cents / 100, cents % 100);
  return buf;
}

std::string make_id(const char* prefix, const Timestamp& ts, int counter) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", counter);
  return std::string(prefix) + "-" + timestamp_digits(ts) + "-" + buf;
}

std::string image_raw_text(const SynthEvent& e, int shot) {
  const KindTemplate& kt = kind_template(e.kind);
  std::string caption = event_caption(e);
  if (shot > 0) caption += ", shot " + std::to_string(shot + 1);
  return caption + "; tags: " + kt.tags + "; ocr: " + kt.ocr_label + " " + e.code;
}

std::string video_raw_text(const SynthEvent& e) {
  const KindTemplate& kt = kind_template(e.kind);
  return "Video from the " + e.kind + " with " +
         participants_phrase(e.participants) + " at " + e.place +
         "; tags: " + kt.tags + "; ocr: " + kt.ocr_label + " " + e.code;
}

}  // namespace

std::pair<std::vector<RawRecord>, WorldModel> generate_corpus(
    std::uint64_t seed, const SynthConfig& config) {
  if (config.emails < 1 || config.images < 1 || config.videos < 1)
    throw Error("synth sizes must be >= 1 per source");
  int pairs = config.conflict_pairs;
  if (pairs < 0) pairs = config.emails >= 4 ? std::max(1, config.emails / 10) : 0;
  if (2 * pairs > config.emails)
    throw Error("conflict pairs need 2 emails each; budget too small");
  const int recaps = config.emails - 2 * pairs;

  const auto& people = people_roster();
  const auto& places = place_gazetteer();
  const int max_events = kKindCount * static_cast<int>(people.size());
  int n_events = std::max({recaps, pairs, (config.images + 1) / 2, config.videos, 1});
  // media beyond two shots per event fold back onto existing events; only
  // emails genuinely need an event each
  n_events = std::min(n_events, max_events);
  if (std::max(recaps, pairs) > max_events)
    throw Error("corpus would need " + std::to_string(std::max(recaps, pairs)) +
                " events, more than the " + std::to_string(max_events) +
                " distinct (kind, participant) combinations available");

  WorldModel world;
  world.seed = seed;
  world.people = people;
  world.places = places;
  std::mt19937_64 rng(seed);

  // events: one per day, unique (kind, place) and (kind, first participant)
  static const int kHours[] = {10, 12, 14, 16, 19, 20};
  long long day = 0;
  Timestamp base = Timestamp::from_parts(2020, 1, 10, 0, 0);
  for (int i = 0; i < n_events; ++i) {
    const int kind_idx = i % kKindCount;
    const int round = i / kKindCount;
    SynthEvent e;
    e.index = i;
    e.kind = kKinds[kind_idx].kind;
    e.place = places[(round + kind_idx) % places.size()].name;
    e.participants.push_back(people[round % people.size()]);
    // extras come from people who never lead an event of this kind, so
    // (kind, person) still names at most one event
    const std::size_t rounds_of_kind =
        static_cast<std::size_t>((n_events - 1 - kind_idx) / kKindCount + 1);
    const std::size_t pool_start = std::min(rounds_of_kind, people.size());
    const int extras = static_cast<int>(rng() % 3);
    for (int j = 0; j < extras && pool_start < people.size(); ++j) {
      const auto& candidate =
          people[pool_start + rng() % (people.size() - pool_start)];
      if (std::find(e.participants.begin(), e.participants.end(), candidate) ==
          e.participants.end())
        e.participants.push_back(candidate);
    }
    day += 5 + static_cast<long long>(rng() % 16);
    const int hour = kHours[rng() % 6];
    const int minute = rng() % 2 ? 30 : 0;
    e.start = Timestamp{base.minutes + day * 24 * 60 + hour * 60 + minute};
    e.duration_minutes = 90 + 30 * static_cast<int>(rng() % 4);
    e.code = std::string(kKinds[kind_idx].code_prefix) + "-" +
             std::to_string(100 + i * 7);
    world.events.push_back(std::move(e));
  }

  std::vector<RawRecord> records;
  int counter = 0;

  auto place_of = [&](const SynthEvent& e) -> const SynthPlace& {
    for (const auto& p : places) {
      if (p.name == e.place) return p;
    }
    throw Error("event references unknown place " + e.place);
  };

  for (int j = 0; j < config.images; ++j) {
    SynthEvent& e = world.events[j % n_events];
    const int shot = static_cast<int>(e.image_ids.size());
    RawRecord r;
    r.source = Source::image;
    r.timestamp = Timestamp{e.start.minutes + 10 + shot * 7};
    r.id = make_id("im", r.timestamp, counter++);
    r.gps = GeoPoint{place_of(e).lat, place_of(e).lon};
    r.media_ref = "media/" + r.id + ".jpg";
    r.raw_text = image_raw_text(e, shot);
    e.image_ids.push_back(r.id);
    records.push_back(std::move(r));
  }

  for (int j = 0; j < config.videos; ++j) {
    SynthEvent& e = world.events[j % n_events];
    const int shot = static_cast<int>(e.video_ids.size());
    RawRecord r;
    r.source = Source::video;
    r.timestamp = Timestamp{e.start.minutes + 45 + shot * 9};
    r.id = make_id("vd", r.timestamp, counter++);
    r.gps = GeoPoint{place_of(e).lat, place_of(e).lon};
    r.media_ref = "media/" + r.id + ".mp4";
    r.raw_text = video_raw_text(e);
    e.video_ids.push_back(r.id);
    records.push_back(std::move(r));
  }

  for (int j = 0; j < recaps; ++j) {
    SynthEvent& e = world.events[j];
    RawRecord r;
    r.source = Source::email;
    r.timestamp = Timestamp{e.start.minutes + 45};  // sent during the event
    r.id = make_id("em", r.timestamp, counter++);
    EmailFields f;
    std::string sender = e.participants.front();
    std::transform(sender.begin(), sender.end(), sender.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    f.from = sender + "@friends.example";
    f.subject = "Re: " + e.kind + " at " + e.place;
    f.body = "Quick recap of the " + e.kind + " at " + e.place + " with " +
             participants_phrase(e.participants) +
             ". Great day all around. Photos to follow.";
    r.email_fields = std::move(f);
    e.email_id = r.id;
    records.push_back(std::move(r));
  }

  for (int p = 0; p < pairs; ++p) {
    SynthEvent& e = world.events[p];
    SynthConflict c;
    c.event_index = e.index;
    c.reference = "REF" + std::to_string(p + 1);

    const long long booked = 10000 + static_cast<long long>(rng() % 190000);
    long long delta = 1 + static_cast<long long>(rng() % 4999);
    if (rng() % 2 && booked - delta > 0) delta = -delta;
    c.booked_amount = format_cents(booked);
    c.final_amount = format_cents(booked + delta);

    RawRecord booking;
    booking.source = Source::email;
    booking.timestamp =
        Timestamp{e.start.minutes - (10 + static_cast<long long>(rng() % 20)) * 24 * 60};
    booking.id = make_id("em", booking.timestamp, counter++);
    EmailFields bf;
    bf.from = "bookings@travelmate.example";
    bf.subject = "Booking confirmation " + c.reference;
    bf.body = "Booking confirmation for your " + e.kind + " at " + e.place +
              ". Reference " + c.reference + ". Total amount " + c.booked_amount +
              " due.";
    booking.email_fields = std::move(bf);
    c.booking_id = booking.id;
    records.push_back(std::move(booking));

    RawRecord invoice;
    invoice.source = Source::email;
    invoice.timestamp = Timestamp{e.start.minutes + 2 * 24 * 60 + 37};
    invoice.id = make_id("em", invoice.timestamp, counter++);
    EmailFields inv;
    inv.from = "bookings@travelmate.example";
    inv.subject = "Invoice " + c.reference;
    inv.body = "Invoice for your " + e.kind + " at " + e.place + ". Reference " +
               c.reference + ". Final amount " + c.final_amount + ".";
    invoice.email_fields = std::move(inv);
    c.invoice_id = invoice.id;
    records.push_back(std::move(invoice));

    world.conflicts.push_back(std::move(c));
  }

  std::sort(records.begin(), records.end(),
            [](const RawRecord& a, const RawRecord& b) { return a.id < b.id; });
  return {std::move(records), std::move(world)};
}

QaCounts default_qa_counts(int total) {
  if (total < 1) throw Error("qa count must be >= 1");
  QaCounts c;
  c.me = total * 30 / 100;
  c.pr = total * 20 / 100;
  c.la = total * 20 / 100;
  c.mut = total * 15 / 100;
  c.abs = total - c.me - c.pr - c.la - c.mut;
  return c;
}

namespace {

std::string qa_id(const char* ability, int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", n + 1);
  return std::string("qa-") + ability + "-" + buf;
}

void require_pool(const char* ability, int requested, int available) {
  if (requested > available)
    throw Error(std::string("not enough events for ability ") + ability +
                ": requested " + std::to_string(requested) + ", available " +
                std::to_string(available));
}

}  // namespace

std::vector<QAInstance> generate_qa(const WorldModel& world, const QaCounts& counts) {
  std::vector<const SynthEvent*> with_image;
  std::vector<const SynthEvent*> with_image_and_email;
  for (const auto& e : world.events) {
    if (!e.image_ids.empty()) {
      with_image.push_back(&e);
      if (!e.email_id.empty()) with_image_and_email.push_back(&e);
    }
  }

  std::vector<QAInstance> out;

  require_pool("PR", counts.pr, static_cast<int>(with_image.size()));
  for (int i = 0; i < counts.pr; ++i) {
    const SynthEvent& e = *with_image[i];
    QAInstance qa;
    qa.id = qa_id("pr", i);
    qa.question = "When did I go to the " + e.kind + " with " +
                  e.participants.front() + "?";
    qa.gold_answer = e.start.to_date();
    qa.qtype = QType::number;
    qa.gold_evidence = {e.image_ids.front()};
    out.push_back(std::move(qa));
  }

  require_pool("LA", counts.la, 2 * static_cast<int>(with_image.size()));
  for (int i = 0; i < counts.la; ++i) {
    const SynthEvent& e = *with_image[i / 2];
    QAInstance qa;
    qa.id = qa_id("la", i);
    if (i % 2 == 0) {
      qa.question = "Where was I for the " + e.kind + " on " + e.start.to_date() + "?";
    } else {
      // only the schema fields carry the OCR'd code
      qa.question = "Where was I for the " + e.kind + " with code " + e.code + "?";
    }
    qa.gold_answer = e.place;
    qa.qtype = QType::open_end;
    qa.gold_evidence = {e.image_ids.front()};
    out.push_back(std::move(qa));
  }

  require_pool("MUT", counts.mut, static_cast<int>(world.conflicts.size()));
  for (int i = 0; i < counts.mut; ++i) {
    const SynthConflict& c = world.conflicts[i];
    const SynthEvent& e = world.events[c.event_index];
    QAInstance qa;
    qa.id = qa_id("mut", i);
    qa.question = "How much did I pay in the end for the " + e.kind + " at " +
                  e.place + " (Reference " + c.reference + ")?";
    qa.gold_answer = "€" + c.final_amount;
    qa.qtype = QType::number;
    qa.gold_evidence = {c.booking_id, c.invoice_id};
    out.push_back(std::move(qa));
  }

  require_pool("ME", counts.me, 2 * static_cast<int>(with_image_and_email.size()));
  for (int i = 0; i < counts.me; ++i) {
    const SynthEvent& e = *with_image_and_email[i / 2];
    QAInstance qa;
    qa.id = qa_id("me", i);
    if (i % 2 == 0) {
      qa.question = "When and where did I go to the " + e.kind + " with " +
                    e.participants.front() + "?";
      qa.gold_answer = e.start.to_date() + ", " + e.place;
      qa.qtype = QType::open_end;
      qa.gold_evidence = {e.email_id, e.image_ids.front()};
    } else {
      qa.question = "Which photos and emails are from the " + e.kind + " at " +
                    e.place + "?";
      std::vector<std::string> ids = e.image_ids;
      ids.push_back(e.email_id);
      std::sort(ids.begin(), ids.end());
      std::string joined;
      for (const auto& id : ids) {
        if (!joined.empty()) joined += ", ";
        joined += id;
      }
      qa.gold_answer = joined;
      qa.qtype = QType::list_recall;
      qa.gold_evidence = std::set<std::string>(ids.begin(), ids.end());
    }
    out.push_back(std::move(qa));
  }

  // abstention targets: (kind, place) pairs no event used
  std::set<std::pair<std::string, std::string>> used;
  for (const auto& e : world.events) used.insert({e.kind, e.place});
  std::vector<std::pair<std::string, std::string>> unused;
  for (const auto& k : kKinds) {
    for (const auto& p : world.places) {
      if (!used.count({k.kind, p.name})) unused.push_back({k.kind, p.name});
    }
  }
  require_pool("ABS", counts.abs, static_cast<int>(unused.size()));
  for (int i = 0; i < counts.abs; ++i) {
    QAInstance qa;
    qa.id = qa_id("abs", i);
    qa.question =
        "Did I ever attend a " + unused[i].first + " at " + unused[i].second + "?";
    qa.gold_answer = "I don't know";
    qa.qtype = QType::open_end;
    out.push_back(std::move(qa));
  }

  return out;
}

}  // namespace memqa
