#pragma once

#include <map>
#include <string>
#include <vector>

#include "memqa/organization.hpp"
#include "memqa/providers.hpp"
#include "memqa/retrieval.hpp"

namespace memqa {

enum class AnswerMode { no_evidence, oracle, single_pass, agentic };

const char* answer_mode_name(AnswerMode m);
AnswerMode answer_mode_from_name(const std::string& name);

struct AnswerIteration {
  std::string query;                      // the query used for this retrieval
  std::vector<std::string> retrieved_ids;
  std::string verdict;  // "SUFFICIENT", "REWRITE: ...", or "" when not asked
};

struct AnswerTrace {
  std::string final;
  std::vector<AnswerIteration> iterations;
  AnswerMode mode = AnswerMode::single_pass;

  std::vector<std::string> evidence_ids() const;  // ids used in the final prompt
};

/// The verbatim answerer prompt template; {{question}} and {{evidence}} are
/// the only substitution points.
extern const char* const kAnswerPromptTemplate;

/// Evidence section: one block per item, "[id]" header line followed by the
/// item's rendered text, blocks separated by a blank line.
std::string render_evidence(const std::vector<MemoryItem>& evidence);
std::string render_answer_prompt(const std::string& question,
                                 const std::vector<MemoryItem>& evidence);

AnswerTrace answer_single_pass(const std::string& question,
                               const std::vector<MemoryItem>& evidence,
                               ChatProvider& chat,
                               AnswerMode mode = AnswerMode::single_pass,
                               const std::vector<std::string>& attachments = {});

struct AgenticConfig {
  RetrieveConfig retrieve;
  int max_iters = 3;
};

/// Retrieve, check sufficiency, optionally rewrite the query and retrieve
/// again. Evidence merges across iterations newest-retrieval-first, deduped
/// by id and capped at k. max_iters=1 degenerates to single_pass over the
/// first retrieval. A malformed sufficiency verdict counts as SUFFICIENT.
AnswerTrace answer_agentic(const std::string& question, const MemoryStore& store,
                           const VectorIndex& index, EmbeddingProvider& embedder,
                           ChatProvider& chat, const AgenticConfig& config);

/// Answers a whole QA file worth of questions under one mode. Oracle mode
/// reads the gold evidence ids; retrieval modes share `retrieve_config`;
/// `max_iters` only matters for agentic mode.
std::vector<Prediction> answer_questions(const std::vector<QAInstance>& qas,
                                         const MemoryStore& store,
                                         const VectorIndex& index,
                                         EmbeddingProvider& embedder,
                                         ChatProvider& chat, AnswerMode mode,
                                         const RetrieveConfig& retrieve_config,
                                         int max_iters);

/// Attachment references for the answerer: the media path for images, up to
/// 8 "<path>#frame<i>" refs for videos (of `video_frames` available), nothing
/// for emails. Paths that don't exist on disk are skipped with a warning.
/// Order follows the evidence order.
std::vector<std::string> attach_media(const std::vector<MemoryItem>& evidence,
                                      const std::map<std::string, RawRecord>& corpus,
                                      int video_frames = 8);

}  // namespace memqa
