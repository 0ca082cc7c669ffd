#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "memqa/model.hpp"
#include "memqa/providers.hpp"

namespace memqa {

/// Fixed answer normalization, applied to both sides before comparison:
/// dates to YYYY-MM-DD, lowercase, currency symbols dropped, thousands
/// separators and trailing ".0" removed from numbers, punctuation to spaces
/// (keeping '.'/'-' inside numbers), articles dropped, whitespace collapsed.
std::string normalize_answer(const std::string& s);

int exact_match(const std::string& gold, const std::string& pred);

/// Split on commas, semicolons and newlines; normalized, empties dropped.
std::set<std::string> to_list(const std::string& s);

/// Jaccard over to_list outputs; both-empty counts as 1.
double jaccard(const std::string& gold, const std::string& pred);

struct JudgeVerdict {
  std::string explanation;
  bool accuracy = false;
};

/// The verbatim judge prompt template; substitution points are {{question}},
/// {{answer}} and {{prediction}}.
extern const char* const kJudgePromptTemplate;

std::string render_judge_prompt(const std::string& question, const std::string& gold,
                                const std::string& prediction);

/// Parses the judge's JSON blob; accepts boolean or "true"/"false" strings
/// for accuracy. Throws Error when unparseable.
JudgeVerdict parse_judge_verdict(const std::string& reply);

/// 0/1 per the judge verdict. An unparseable reply is retried once, then
/// scored 0 with a logged failure.
int llm_judge(const std::string& question, const std::string& gold,
              const std::string& prediction, ChatProvider& judge);

/// Type-aware question score: EM for number, Jaccard for list_recall,
/// LLM judge for open_end.
double qs(const QAInstance& qa, const std::string& prediction, ChatProvider& judge);

/// |gold ∩ top-k| / |gold|; empty gold (abstention) scores 1.
double recall_at_k(const std::set<std::string>& gold,
                   const std::vector<std::string>& retrieved, int k);
double recall_at_k_gt(const std::set<std::string>& gold,
                      const std::vector<std::string>& retrieved);
double joint_at_k(double qs_score, double recall);

/// Per-question metrics for aligned QA/prediction sets. Every prediction must
/// match a QA id and vice versa.
std::vector<EvalRecord> evaluate_all(const std::vector<QAInstance>& qas,
                                     const std::vector<Prediction>& preds, int k,
                                     ChatProvider& judge);

double round_half_even(double value, int decimals);

struct TypeStats {
  int count = 0;
  double qs_percent = 0.0;  // rounded; 0 when count == 0
};

struct AggregateReport {
  int count = 0;
  int k = 10;
  double qs_percent = 0.0;
  double recall_percent = 0.0;
  double recall_gt_percent = 0.0;
  double joint_percent = 0.0;
  std::map<std::string, TypeStats> by_type;  // keys: number, list_recall, open_end
};

AggregateReport aggregate_report(const std::vector<EvalRecord>& records,
                                 const std::vector<QAInstance>& qas, int k);

std::string report_to_text(const AggregateReport& report);
std::string report_to_json(const AggregateReport& report);

}  // namespace memqa
