#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace memqa {

/// Error thrown by parsers and pipeline stages. Carries enough context to
/// identify the offending record or line.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

enum class Source { image, video, email };

const char* source_name(Source s);
Source source_from_name(const std::string& name);

/// UTC timestamp with minute precision, stored as minutes since the Unix
/// epoch. Canonical text form is "YYYY-MM-DDTHH:MMZ".
struct Timestamp {
  std::int64_t minutes = 0;

  static Timestamp parse(const std::string& iso);
  static Timestamp from_parts(int year, int month, int day, int hour, int minute);

  std::string to_iso() const;
  /// "YYYY-MM-DD HH:MM", the form used inside schema field maps.
  std::string to_field_time() const;
  /// "YYYY-MM-DD"
  std::string to_date() const;
  /// Human phrase like "Jan 1st, 2020 afternoon".
  std::string to_phrase() const;

  void parts(int& year, int& month, int& day, int& hour, int& minute) const;

  auto operator<=>(const Timestamp&) const = default;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
  bool operator==(const GeoPoint&) const = default;
};

struct EmailFields {
  std::string from;
  std::string subject;
  std::string body;
  bool operator==(const EmailFields&) const = default;
};

/// One source artifact: an image, a video, or an email.
struct RawRecord {
  std::string id;
  Source source = Source::image;
  Timestamp timestamp;
  std::optional<GeoPoint> gps;
  std::optional<std::string> media_ref;
  std::optional<EmailFields> email_fields;
  std::optional<std::string> raw_text;

  bool operator==(const RawRecord&) const = default;
};

/// Returns all invariant violations; empty means valid.
std::vector<std::string> validate_record(const RawRecord& record);

/// Per-source ordered field-name lists for schema-guided memory.
struct Schema {
  std::map<Source, std::vector<std::string>> fields;

  static Schema defaults();
  const std::vector<std::string>& for_source(Source s) const;
  std::vector<std::string> validate() const;
};

enum class MemoryKind { dm, sgm };

/// One normalized memory entry: either free text (DM) or an ordered field
/// map conforming to the active schema (SGM).
struct MemoryItem {
  std::string id;
  MemoryKind kind = MemoryKind::dm;
  std::string text;                                          // DM only
  std::vector<std::pair<std::string, std::string>> fields;   // SGM only
  Source source = Source::image;
  Timestamp timestamp;
  int revision = 0;

  bool operator==(const MemoryItem&) const = default;

  const std::string* field(const std::string& key) const;
};

enum class QType { number, list_recall, open_end };

const char* qtype_name(QType t);
QType qtype_from_name(const std::string& name);

struct QAInstance {
  std::string id;
  std::string question;
  std::string gold_answer;
  QType qtype = QType::open_end;
  std::set<std::string> gold_evidence;
  std::optional<std::string> anchor_date;  // "YYYY-MM-DD", parsed from "Today is ..."

  bool operator==(const QAInstance&) const = default;
};

/// Output of the answer stage: one line per question.
struct Prediction {
  std::string qa_id;
  std::string answer;
  std::vector<std::string> retrieved_ids;

  bool operator==(const Prediction&) const = default;
};

struct EvalRecord {
  std::string qa_id;
  std::string predicted;
  std::vector<std::string> retrieved_ids;
  double qs = 0.0;
  double recall_at_k = 0.0;
  double recall_at_k_gt = 0.0;
  double joint_at_k = 0.0;
};

// --- line-oriented serialization (one JSON document per line) -------------

std::string record_to_json(const RawRecord& record);
RawRecord record_from_json(const std::string& line);

std::string item_to_json(const MemoryItem& item);
MemoryItem item_from_json(const std::string& line);

std::string qa_to_json(const QAInstance& qa);
QAInstance qa_from_json(const std::string& line);

std::string prediction_to_json(const Prediction& pred);
Prediction prediction_from_json(const std::string& line);

std::string eval_record_to_json(const EvalRecord& rec);
EvalRecord eval_record_from_json(const std::string& line);

std::string schema_to_json(const Schema& schema);
Schema schema_from_json(const std::string& text);

std::vector<RawRecord> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<RawRecord>& corpus);

std::vector<MemoryItem> read_memory_file(const std::string& path);
void write_memory_file(const std::string& path, const std::vector<MemoryItem>& items);

std::vector<QAInstance> read_qa_file(const std::string& path);
void write_qa_file(const std::string& path, const std::vector<QAInstance>& qas);

std::vector<Prediction> read_pred_file(const std::string& path);
void write_pred_file(const std::string& path, const std::vector<Prediction>& preds);

std::vector<EvalRecord> read_eval_file(const std::string& path);
void write_eval_file(const std::string& path, const std::vector<EvalRecord>& records);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<std::string> read_lines(const std::string& path);

/// FNV-1a 64-bit content digest, hex-encoded. Used for run manifests.
std::string content_digest(const std::string& content);
std::string file_digest(const std::string& path);

}  // namespace memqa
