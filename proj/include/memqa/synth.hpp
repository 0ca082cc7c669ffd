#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "memqa/model.hpp"

namespace memqa {

struct SynthPlace {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
};

struct SynthEvent {
  int index = 0;
  std::string kind;
  Timestamp start;
  int duration_minutes = 0;
  std::string place;
  std::vector<std::string> participants;  // first one is unique per kind
  std::string code;                       // OCR'd ticket/badge code
  std::vector<std::string> image_ids;
  std::vector<std::string> video_ids;
  std::string email_id;                   // recap email, may be empty
};

/// A booking/invoice pair about the same event where the later record
/// supersedes the earlier amount.
struct SynthConflict {
  int event_index = 0;
  std::string reference;      // shared "REFn" token
  std::string booking_id;
  std::string invoice_id;
  std::string booked_amount;  // e.g. "853.26"
  std::string final_amount;   // e.g. "842.97"
};

struct WorldModel {
  std::uint64_t seed = 0;
  std::vector<std::string> people;
  std::vector<SynthPlace> places;
  std::vector<SynthEvent> events;      // temporally ordered, one per day
  std::vector<SynthConflict> conflicts;
};

struct SynthConfig {
  int emails = 50;
  int images = 40;
  int videos = 10;
  int conflict_pairs = -1;  // -1 picks a default from the email budget
};

/// Deterministic per (seed, config). Every record belongs to an event; the
/// number of events is bounded by the unique (kind, first-participant)
/// combinations available.
std::pair<std::vector<RawRecord>, WorldModel> generate_corpus(std::uint64_t seed,
                                                              const SynthConfig& config);

struct QaCounts {
  int pr = 0;   // personal-reference recall (number: a date)
  int la = 0;   // location awareness (open_end: a place)
  int mut = 0;  // memory update (number: the superseding amount)
  int me = 0;   // multi-evidence (alternating open_end / list_recall)
  int abs = 0;  // abstention (open_end: unknown)

  int total() const { return pr + la + mut + me + abs; }
};

/// Ability mix for a question budget, ME-heavy like the benchmark's.
QaCounts default_qa_counts(int total);

/// Gold answers and gold evidence are computed from the world model alone.
/// Throws when an ability asks for more questions than the world supports,
/// naming the ability.
std::vector<QAInstance> generate_qa(const WorldModel& world, const QaCounts& counts);

}  // namespace memqa
