#include "memqa/model.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace memqa {

using json = nlohmann::ordered_json;

const char* source_name(Source s) {
  switch (s) {
    case Source::image: return "image";
    case Source::video: return "video";
    case Source::email: return "email";
  }
  return "image";
}

Source source_from_name(const std::string& name) {
  if (name == "image") return Source::image;
  if (name == "video") return Source::video;
  if (name == "email") return Source::email;
  throw Error("unknown source: " + name);
}

const char* qtype_name(QType t) {
  switch (t) {
    case QType::number: return "number";
    case QType::list_recall: return "list_recall";
    case QType::open_end: return "open_end";
  }
  return "open_end";
}

QType qtype_from_name(const std::string& name) {
  if (name == "number") return QType::number;
  if (name == "list_recall") return QType::list_recall;
  if (name == "open_end") return QType::open_end;
  throw Error("unknown qtype: " + name);
}

// --- civil-date arithmetic (proleptic Gregorian, Howard Hinnant's algorithm)

namespace {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe + era * 400);
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

const std::array<const char*, 12> kMonthAbbrev = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

std::string ordinal(int day) {
  const char* suffix = "th";
  if (day % 100 < 11 || day % 100 > 13) {
    switch (day % 10) {
      case 1: suffix = "st"; break;
      case 2: suffix = "nd"; break;
      case 3: suffix = "rd"; break;
    }
  }
  return std::to_string(day) + suffix;
}

}  // namespace

Timestamp Timestamp::from_parts(int year, int month, int day, int hour, int minute) {
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour < 0 || hour > 23 ||
      minute < 0 || minute > 59) {
    throw Error("invalid timestamp parts");
  }
  Timestamp t;
  t.minutes = days_from_civil(year, month, day) * 1440 + hour * 60 + minute;
  return t;
}

Timestamp Timestamp::parse(const std::string& iso) {
  int y, mo, d, h, mi;
  char sep;
  if (std::sscanf(iso.c_str(), "%d-%d-%d%c%d:%d", &y, &mo, &d, &sep, &h, &mi) != 6 ||
      (sep != 'T' && sep != ' ')) {
    throw Error("malformed timestamp: " + iso);
  }
  return from_parts(y, mo, d, h, mi);
}

void Timestamp::parts(int& year, int& month, int& day, int& hour, int& minute) const {
  std::int64_t days = minutes / 1440;
  std::int64_t rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    days -= 1;
  }
  civil_from_days(days, year, month, day);
  hour = static_cast<int>(rem / 60);
  minute = static_cast<int>(rem % 60);
}

std::string Timestamp::to_iso() const {
  int y, mo, d, h, mi;
  parts(y, mo, d, h, mi);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02dZ", y, mo, d, h, mi);
  return buf;
}

std::string Timestamp::to_field_time() const {
  int y, mo, d, h, mi;
  parts(y, mo, d, h, mi);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", y, mo, d, h, mi);
  return buf;
}

std::string Timestamp::to_date() const {
  int y, mo, d, h, mi;
  parts(y, mo, d, h, mi);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, mo, d);
  return buf;
}

std::string Timestamp::to_phrase() const {
  int y, mo, d, h, mi;
  parts(y, mo, d, h, mi);
  const char* part = "night";
  if (h >= 5 && h < 12) part = "morning";
  else if (h >= 12 && h < 17) part = "afternoon";
  else if (h >= 17 && h < 21) part = "evening";
  std::ostringstream out;
  out << kMonthAbbrev[mo - 1] << ' ' << ordinal(d) << ", " << y << ' ' << part;
  return out.str();
}

// --- validation -----------------------------------------------------------

std::vector<std::string> validate_record(const RawRecord& record) {
  std::vector<std::string> errors;
  if (record.id.empty()) errors.push_back("id must be nonempty");
  if (record.source == Source::email) {
    if (!record.email_fields) errors.push_back("email_fields required");
    if (record.media_ref) errors.push_back("media_ref not allowed for email");
  } else {
    if (!record.media_ref) errors.push_back("media_ref required");
    if (record.email_fields) errors.push_back("email_fields not allowed for " +
                                              std::string(source_name(record.source)));
  }
  if (record.gps) {
    if (record.gps->lat < -90.0 || record.gps->lat > 90.0)
      errors.push_back("gps.lat out of range");
    if (record.gps->lon < -180.0 || record.gps->lon > 180.0)
      errors.push_back("gps.lon out of range");
  }
  return errors;
}

Schema Schema::defaults() {
  Schema s;
  s.fields[Source::image] = {"id", "time", "location", "source", "entities", "tags", "OCR"};
  s.fields[Source::video] = {"id", "time", "location", "source", "entities", "tags", "OCR"};
  s.fields[Source::email] = {"id", "time", "source", "summary", "body"};
  return s;
}

const std::vector<std::string>& Schema::for_source(Source s) const {
  auto it = fields.find(s);
  if (it == fields.end()) throw Error(std::string("schema missing source ") + source_name(s));
  return it->second;
}

std::vector<std::string> Schema::validate() const {
  std::vector<std::string> errors;
  for (const auto& [src, names] : fields) {
    std::set<std::string> seen;
    for (const auto& n : names) {
      if (!seen.insert(n).second)
        errors.push_back(std::string(source_name(src)) + ": duplicate field " + n);
    }
    for (const char* required : {"id", "time", "source"}) {
      if (!seen.count(required))
        errors.push_back(std::string(source_name(src)) + ": missing field " + required);
    }
  }
  return errors;
}

const std::string* MemoryItem::field(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

// --- serialization --------------------------------------------------------

namespace {

json parse_line(const std::string& line) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed JSON line: ") + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const char* what) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw Error(std::string(what) + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

std::string record_to_json(const RawRecord& r) {
  json j;
  j["id"] = r.id;
  j["source"] = source_name(r.source);
  j["timestamp"] = r.timestamp.to_iso();
  if (r.gps) j["gps"] = {{"lat", r.gps->lat}, {"lon", r.gps->lon}};
  if (r.media_ref) j["media_ref"] = *r.media_ref;
  if (r.email_fields)
    j["email_fields"] = {{"from", r.email_fields->from},
                         {"subject", r.email_fields->subject},
                         {"body", r.email_fields->body}};
  if (r.raw_text) j["raw_text"] = *r.raw_text;
  return j.dump();
}

RawRecord record_from_json(const std::string& line) {
  json j = parse_line(line);
  reject_unknown_keys(j, {"id", "source", "timestamp", "gps", "media_ref",
                          "email_fields", "raw_text"},
                      "RawRecord");
  RawRecord r;
  r.id = j.at("id").get<std::string>();
  r.source = source_from_name(j.at("source").get<std::string>());
  r.timestamp = Timestamp::parse(j.at("timestamp").get<std::string>());
  if (j.contains("gps")) {
    reject_unknown_keys(j["gps"], {"lat", "lon"}, "gps");
    r.gps = GeoPoint{j["gps"].at("lat").get<double>(), j["gps"].at("lon").get<double>()};
  }
  if (j.contains("media_ref")) r.media_ref = j["media_ref"].get<std::string>();
  if (j.contains("email_fields")) {
    reject_unknown_keys(j["email_fields"], {"from", "subject", "body"}, "email_fields");
    r.email_fields = EmailFields{j["email_fields"].at("from").get<std::string>(),
                                 j["email_fields"].at("subject").get<std::string>(),
                                 j["email_fields"].at("body").get<std::string>()};
  }
  if (j.contains("raw_text")) r.raw_text = j["raw_text"].get<std::string>();
  return r;
}

std::string item_to_json(const MemoryItem& m) {
  json j;
  j["id"] = m.id;
  j["kind"] = m.kind == MemoryKind::dm ? "dm" : "sgm";
  if (m.kind == MemoryKind::dm) {
    j["text"] = m.text;
  } else {
    json f = json::array();
    for (const auto& [k, v] : m.fields) f.push_back(json::array({k, v}));
    j["fields"] = std::move(f);
  }
  j["source"] = source_name(m.source);
  j["timestamp"] = m.timestamp.to_iso();
  j["revision"] = m.revision;
  return j.dump();
}

MemoryItem item_from_json(const std::string& line) {
  json j = parse_line(line);
  reject_unknown_keys(j, {"id", "kind", "text", "fields", "source", "timestamp", "revision"},
                      "MemoryItem");
  MemoryItem m;
  m.id = j.at("id").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "dm") m.kind = MemoryKind::dm;
  else if (kind == "sgm") m.kind = MemoryKind::sgm;
  else throw Error("unknown memory kind: " + kind);
  if (m.kind == MemoryKind::dm) {
    m.text = j.at("text").get<std::string>();
    if (j.contains("fields")) throw Error("dm item must not carry fields");
  } else {
    if (j.contains("text")) throw Error("sgm item must not carry text");
    for (const auto& pair : j.at("fields")) {
      m.fields.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
  }
  m.source = source_from_name(j.at("source").get<std::string>());
  m.timestamp = Timestamp::parse(j.at("timestamp").get<std::string>());
  m.revision = j.at("revision").get<int>();
  if (m.revision < 0) throw Error("revision must be nonnegative");
  return m;
}

std::string qa_to_json(const QAInstance& qa) {
  json j;
  j["id"] = qa.id;
  j["question"] = qa.question;
  j["gold_answer"] = qa.gold_answer;
  j["qtype"] = qtype_name(qa.qtype);
  j["gold_evidence"] = json(qa.gold_evidence);
  if (qa.anchor_date) j["anchor_date"] = *qa.anchor_date;
  return j.dump();
}

QAInstance qa_from_json(const std::string& line) {
  json j = parse_line(line);
  reject_unknown_keys(j, {"id", "question", "gold_answer", "qtype", "gold_evidence",
                          "anchor_date"},
                      "QAInstance");
  QAInstance qa;
  qa.id = j.at("id").get<std::string>();
  qa.question = j.at("question").get<std::string>();
  qa.gold_answer = j.at("gold_answer").get<std::string>();
  qa.qtype = qtype_from_name(j.at("qtype").get<std::string>());
  for (const auto& e : j.at("gold_evidence")) qa.gold_evidence.insert(e.get<std::string>());
  if (j.contains("anchor_date")) qa.anchor_date = j["anchor_date"].get<std::string>();
  return qa;
}

std::string prediction_to_json(const Prediction& p) {
  json j;
  j["qa_id"] = p.qa_id;
  j["answer"] = p.answer;
  j["retrieved_ids"] = p.retrieved_ids;
  return j.dump();
}

Prediction prediction_from_json(const std::string& line) {
  json j = parse_line(line);
  reject_unknown_keys(j, {"qa_id", "answer", "retrieved_ids"}, "Prediction");
  Prediction p;
  p.qa_id = j.at("qa_id").get<std::string>();
  p.answer = j.at("answer").get<std::string>();
  p.retrieved_ids = j.at("retrieved_ids").get<std::vector<std::string>>();
  return p;
}

std::string eval_record_to_json(const EvalRecord& r) {
  json j;
  j["qa_id"] = r.qa_id;
  j["predicted"] = r.predicted;
  j["retrieved_ids"] = r.retrieved_ids;
  j["qs"] = r.qs;
  j["recall_at_k"] = r.recall_at_k;
  j["recall_at_k_gt"] = r.recall_at_k_gt;
  j["joint_at_k"] = r.joint_at_k;
  return j.dump();
}

EvalRecord eval_record_from_json(const std::string& line) {
  json j = parse_line(line);
  EvalRecord r;
  r.qa_id = j.at("qa_id").get<std::string>();
  r.predicted = j.at("predicted").get<std::string>();
  r.retrieved_ids = j.at("retrieved_ids").get<std::vector<std::string>>();
  r.qs = j.at("qs").get<double>();
  r.recall_at_k = j.at("recall_at_k").get<double>();
  r.recall_at_k_gt = j.at("recall_at_k_gt").get<double>();
  r.joint_at_k = j.at("joint_at_k").get<double>();
  return r;
}

std::string schema_to_json(const Schema& schema) {
  json j;
  for (const auto& [src, names] : schema.fields) j[source_name(src)] = names;
  return j.dump();
}

Schema schema_from_json(const std::string& text) {
  json j = parse_line(text);
  Schema s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    s.fields[source_from_name(it.key())] = it.value().get<std::vector<std::string>>();
  }
  auto errors = s.validate();
  if (!errors.empty()) throw Error("invalid schema: " + errors.front());
  return s;
}

// --- file IO --------------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_jsonl(const std::string& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

template <typename T, typename Dump>
void write_jsonl(const std::string& path, const std::vector<T>& values, Dump dump) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& v : values) out << dump(v) << '\n';
}

}  // namespace

std::vector<RawRecord> read_corpus(const std::string& path) {
  auto corpus = read_jsonl<RawRecord>(path, record_from_json);
  std::set<std::string> seen;
  for (const auto& r : corpus) {
    if (!seen.insert(r.id).second) throw Error(path + ": duplicate record id " + r.id);
  }
  return corpus;
}

void write_corpus(const std::string& path, const std::vector<RawRecord>& corpus) {
  write_jsonl(path, corpus, record_to_json);
}

std::vector<MemoryItem> read_memory_file(const std::string& path) {
  return read_jsonl<MemoryItem>(path, item_from_json);
}

void write_memory_file(const std::string& path, const std::vector<MemoryItem>& items) {
  write_jsonl(path, items, item_to_json);
}

std::vector<QAInstance> read_qa_file(const std::string& path) {
  return read_jsonl<QAInstance>(path, qa_from_json);
}

void write_qa_file(const std::string& path, const std::vector<QAInstance>& qas) {
  write_jsonl(path, qas, qa_to_json);
}

std::vector<Prediction> read_pred_file(const std::string& path) {
  return read_jsonl<Prediction>(path, prediction_from_json);
}

void write_pred_file(const std::string& path, const std::vector<Prediction>& preds) {
  write_jsonl(path, preds, prediction_to_json);
}

std::vector<EvalRecord> read_eval_file(const std::string& path) {
  return read_jsonl<EvalRecord>(path, eval_record_from_json);
}

void write_eval_file(const std::string& path, const std::vector<EvalRecord>& records) {
  write_jsonl(path, records, eval_record_to_json);
}

std::string content_digest(const std::string& content) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : content) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::string& path) {
  return content_digest(read_text_file(path));
}

}  // namespace memqa
