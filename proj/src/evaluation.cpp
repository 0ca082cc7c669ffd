#include "memqa/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <regex>

#include <json.hpp>

#include "memqa/textutil.hpp"

namespace memqa {

using json = nlohmann::ordered_json;

namespace {

void erase_all(std::string& s, const std::string& needle) {
  std::size_t pos = 0;
  while ((pos = s.find(needle, pos)) != std::string::npos) s.erase(pos, needle.size());
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::string normalize_answer(const std::string& input) {
  std::string s = text::canonicalize_dates(input);
  s = text::to_lower(s);
  for (const char* sym : {"€", "$", "£", "¥"}) erase_all(s, sym);

  static const std::regex kThousands(R"((\d),(\d{3}))");
  while (std::regex_search(s, kThousands)) {
    s = std::regex_replace(s, kThousands, "$1$2");
  }

  std::string filtered;
  filtered.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if ((c >= 'a' && c <= 'z') || is_digit(c)) {
      filtered += c;
    } else if ((c == '.' || c == '-') && i > 0 && i + 1 < s.size() &&
               is_digit(s[i - 1]) && is_digit(s[i + 1])) {
      filtered += c;  // decimal point or date separator inside a number
    } else {
      filtered += ' ';
    }
  }

  static const std::regex kTrailingZero(R"(^(\d+)\.0+$)");
  std::string out;
  std::size_t pos = 0;
  while (pos < filtered.size()) {
    const auto end = filtered.find(' ', pos);
    std::string tok = filtered.substr(pos, end == std::string::npos ? end : end - pos);
    pos = end == std::string::npos ? filtered.size() : end + 1;
    if (tok.empty() || tok == "a" || tok == "an" || tok == "the") continue;
    std::smatch m;
    if (std::regex_match(tok, m, kTrailingZero)) tok = m[1];
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

int exact_match(const std::string& gold, const std::string& pred) {
  return normalize_answer(gold) == normalize_answer(pred) ? 1 : 0;
}

std::set<std::string> to_list(const std::string& s) {
  std::set<std::string> out;
  std::string element;
  auto flush = [&] {
    const std::string norm = normalize_answer(element);
    if (!norm.empty()) out.insert(norm);
    element.clear();
  };
  for (char c : s) {
    if (c == ',' || c == ';' || c == '\n') {
      flush();
    } else {
      element += c;
    }
  }
  flush();
  return out;
}

double jaccard(const std::string& gold, const std::string& pred) {
  const auto g = to_list(gold);
  const auto p = to_list(pred);
  if (g.empty() && p.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& e : g) inter += p.count(e);
  const std::size_t uni = g.size() + p.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

const char* const kJudgePromptTemplate =
    "You are an evaluator, and you are given a task to evaluate a model "
    "predictions with a given question.\n"
    "Let's follow the instructions step by step to make a judgement.\n"
    "\n"
    "1. As the first step, you need to check whether the prediction was really "
    "answering the question.\n"
    "\n"
    "2. If the model prediction does provide a meaningful answer, judge whether "
    "the model Prediction matches the ground truth answer by reasoning "
    "according to the following steps:\n"
    "\n"
    "2.1: Always assume the ground truth is correct.\n"
    "\n"
    "2.2: Pay attention to theses special cases:\n"
    "\n"
    "a. If the ground truth answer contains numbers, the value of \"accuracy\" "
    "is true only if numbers in ground truth and numbers in model predictions "
    "match very well; in case of math questions, \"accuracy\" is true only if "
    "the numbers in model predictions EXACTLY matches the numbers in ground "
    "truth;\n"
    "\n"
    "b. If the ground truth answer contains time, and/or time range, "
    "\"accuracy\" is \"true\" only if if times and time ranges in ground truth "
    "and model predictions match very well.\n"
    "\n"
    "c. If the ground truth answer contains a set of objects, \"accuracy\" is "
    "\"true\" if the model prediction covers most of the objects in the ground "
    "truth; however, \"accuracy\" if \"false\" if the model prediction has a "
    "lot of objects that are not in the ground truth.\n"
    "\n"
    "d. If the ground truth is something similar to \"I don't know\", "
    "\"accuracy\" is \"true\" only if the model prediction also implies the "
    "similar thing.\n"
    "\n"
    "2.3: Even if the prediction statement is reasonable, if it conflicts with "
    "or does not match the ground truth, \"accuracy\" should be \"false\".\n"
    "\n"
    "2.4: \"Accuracy\" is true if the ground truth information is covered by "
    "the prediction.\n"
    "The prediction is allowed to provide more information but should not be "
    "against the ground truth.\n"
    "If it is hard to decide whether the prediction matches ground truth, "
    "\"accuracy\" should be \"false\".\n"
    "\n"
    "Think step by step following the instructions above, and then make a "
    "judgment.\n"
    "Respond with only a single JSON blob with an \"explanation\" field that "
    "has your short (less than 100 word) reasoning steps\n"
    "and an \"accuracy\" field which is \"true\" or \"false\".\n"
    "\n"
    "Question: {{question}}\n"
    "Ground truth: {{answer}}\n"
    "Prediction: {{prediction}}";

namespace {

std::string substitute(std::string tmpl, const std::string& marker,
                       const std::string& value) {
  const auto pos = tmpl.find(marker);
  if (pos == std::string::npos) throw Error("template marker missing: " + marker);
  return tmpl.replace(pos, marker.size(), value);
}

}  // namespace

std::string render_judge_prompt(const std::string& question, const std::string& gold,
                                const std::string& prediction) {
  std::string prompt = kJudgePromptTemplate;
  prompt = substitute(std::move(prompt), "{{question}}", question);
  prompt = substitute(std::move(prompt), "{{answer}}", gold);
  prompt = substitute(std::move(prompt), "{{prediction}}", prediction);
  return prompt;
}

JudgeVerdict parse_judge_verdict(const std::string& reply) {
  std::string blob = text::trim(reply);
  // tolerate leading/trailing prose around the blob
  const auto open = blob.find('{');
  const auto close = blob.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw Error("judge reply contains no JSON blob");
  blob = blob.substr(open, close - open + 1);

  json j;
  try {
    j = json::parse(blob);
  } catch (const json::exception& e) {
    throw Error(std::string("judge reply is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("accuracy"))
    throw Error("judge reply lacks an accuracy field");

  JudgeVerdict verdict;
  if (j.contains("explanation") && j["explanation"].is_string())
    verdict.explanation = j["explanation"].get<std::string>();
  const json& acc = j["accuracy"];
  if (acc.is_boolean()) {
    verdict.accuracy = acc.get<bool>();
  } else if (acc.is_string()) {
    const std::string v = text::to_lower(acc.get<std::string>());
    if (v != "true" && v != "false")
      throw Error("judge accuracy is neither true nor false: " + v);
    verdict.accuracy = v == "true";
  } else {
    throw Error("judge accuracy has an unexpected type");
  }
  return verdict;
}

int llm_judge(const std::string& question, const std::string& gold,
              const std::string& prediction, ChatProvider& judge) {
  std::vector<ChatMessage> messages;
  messages.push_back({"user", render_judge_prompt(question, gold, prediction), {}});
  std::string failure;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = judge.chat("judge", messages);
      return parse_judge_verdict(reply).accuracy ? 1 : 0;
    } catch (const std::exception& e) {
      failure = e.what();
    }
  }
  std::cerr << "warning: judge verdict unusable after retry, scoring 0: "
            << failure << '\n';
  return 0;
}

double qs(const QAInstance& qa, const std::string& prediction, ChatProvider& judge) {
  switch (qa.qtype) {
    case QType::number: return exact_match(qa.gold_answer, prediction);
    case QType::list_recall: return jaccard(qa.gold_answer, prediction);
    case QType::open_end:
      return llm_judge(qa.question, qa.gold_answer, prediction, judge);
  }
  return 0.0;
}

double recall_at_k(const std::set<std::string>& gold,
                   const std::vector<std::string>& retrieved, int k) {
  if (k < 1) throw Error("recall_at_k: k must be >= 1");
  if (gold.empty()) return 1.0;  // abstention: no evidence required
  std::size_t found = 0;
  const std::size_t limit = std::min(retrieved.size(), static_cast<std::size_t>(k));
  std::set<std::string> seen;
  for (std::size_t i = 0; i < limit; ++i) {
    if (seen.insert(retrieved[i]).second && gold.count(retrieved[i])) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(gold.size());
}

double recall_at_k_gt(const std::set<std::string>& gold,
                      const std::vector<std::string>& retrieved) {
  if (gold.empty()) return 1.0;
  return recall_at_k(gold, retrieved, static_cast<int>(gold.size()));
}

double joint_at_k(double qs_score, double recall) { return qs_score * recall; }

std::vector<EvalRecord> evaluate_all(const std::vector<QAInstance>& qas,
                                     const std::vector<Prediction>& preds, int k,
                                     ChatProvider& judge) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.qa_id, &p).second)
      throw Error("duplicate prediction for qa id " + p.qa_id);
  }
  std::set<std::string> qa_ids;
  for (const auto& qa : qas) qa_ids.insert(qa.id);
  for (const auto& [id, _] : by_id) {
    if (!qa_ids.count(id)) throw Error("prediction references unknown qa id " + id);
  }

  std::vector<EvalRecord> records;
  records.reserve(qas.size());
  for (const auto& qa : qas) {
    auto it = by_id.find(qa.id);
    if (it == by_id.end()) throw Error("missing prediction for qa id " + qa.id);
    const Prediction& pred = *it->second;
    EvalRecord rec;
    rec.qa_id = qa.id;
    rec.predicted = pred.answer;
    rec.retrieved_ids = pred.retrieved_ids;
    rec.qs = qs(qa, pred.answer, judge);
    rec.recall_at_k = recall_at_k(qa.gold_evidence, pred.retrieved_ids, k);
    rec.recall_at_k_gt = recall_at_k_gt(qa.gold_evidence, pred.retrieved_ids);
    rec.joint_at_k = joint_at_k(rec.qs, rec.recall_at_k);
    records.push_back(std::move(rec));
  }
  return records;
}

double round_half_even(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  const double floor_v = std::floor(scaled);
  const double frac = scaled - floor_v;
  double rounded;
  if (std::fabs(frac - 0.5) < 1e-9) {
    rounded = std::fmod(floor_v, 2.0) == 0.0 ? floor_v : floor_v + 1.0;
  } else {
    rounded = std::floor(scaled + 0.5);
  }
  return rounded / scale;
}

AggregateReport aggregate_report(const std::vector<EvalRecord>& records,
                                 const std::vector<QAInstance>& qas, int k) {
  if (records.size() != qas.size())
    throw Error("aggregate_report: record/qa count mismatch");
  std::map<std::string, const QAInstance*> qa_by_id;
  for (const auto& qa : qas) qa_by_id[qa.id] = &qa;

  AggregateReport report;
  report.count = static_cast<int>(records.size());
  report.k = k;
  for (QType t : {QType::number, QType::list_recall, QType::open_end})
    report.by_type[qtype_name(t)] = TypeStats{};

  double qs_sum = 0, recall_sum = 0, recall_gt_sum = 0, joint_sum = 0;
  std::map<std::string, double> type_qs_sum;
  for (const auto& rec : records) {
    auto it = qa_by_id.find(rec.qa_id);
    if (it == qa_by_id.end())
      throw Error("aggregate_report: record for unknown qa id " + rec.qa_id);
    qs_sum += rec.qs;
    recall_sum += rec.recall_at_k;
    recall_gt_sum += rec.recall_at_k_gt;
    joint_sum += rec.joint_at_k;
    const std::string type = qtype_name(it->second->qtype);
    report.by_type[type].count += 1;
    type_qs_sum[type] += rec.qs;
  }

  auto percent = [&](double sum, int n) {
    return n == 0 ? 0.0 : round_half_even(100.0 * sum / n, 1);
  };
  report.qs_percent = percent(qs_sum, report.count);
  report.recall_percent = percent(recall_sum, report.count);
  report.recall_gt_percent = percent(recall_gt_sum, report.count);
  report.joint_percent = percent(joint_sum, report.count);
  for (auto& [type, stats] : report.by_type)
    stats.qs_percent = percent(type_qs_sum[type], stats.count);
  return report;
}

std::string report_to_text(const AggregateReport& r) {
  char buf[256];
  std::string out;
  auto line = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
    out += '\n';
  };
  const auto& n = r.by_type.at("number");
  const auto& l = r.by_type.at("list_recall");
  const auto& o = r.by_type.at("open_end");
  line("questions  %d  (N %d / R %d / O %d)", r.count, n.count, l.count, o.count);
  line("%-10s %6s %6s %6s %6s %8s %9s %9s", "", "QS", "N", "R", "O",
       ("R@" + std::to_string(r.k)).c_str(),
       ("R@" + std::to_string(r.k) + "_GT").c_str(),
       ("Joint@" + std::to_string(r.k)).c_str());
  line("%-10s %6.1f %6.1f %6.1f %6.1f %8.1f %9.1f %9.1f", "overall", r.qs_percent,
       n.qs_percent, l.qs_percent, o.qs_percent, r.recall_percent,
       r.recall_gt_percent, r.joint_percent);
  return out;
}

std::string report_to_json(const AggregateReport& r) {
  json j;
  j["count"] = r.count;
  j["k"] = r.k;
  j["qs"] = r.qs_percent;
  j["recall_at_k"] = r.recall_percent;
  j["recall_at_k_gt"] = r.recall_gt_percent;
  j["joint_at_k"] = r.joint_percent;
  json types;
  for (const auto& [type, stats] : r.by_type) {
    types[type] = {{"count", stats.count}, {"qs", stats.qs_percent}};
  }
  j["by_type"] = types;
  return j.dump(2);
}

}  // namespace memqa
