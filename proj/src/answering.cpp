#include "memqa/answering.hpp"

#include <filesystem>
#include <iostream>

#include "memqa/ingestion.hpp"
#include "memqa/textutil.hpp"

namespace memqa {

const char* answer_mode_name(AnswerMode m) {
  switch (m) {
    case AnswerMode::no_evidence: return "no_evidence";
    case AnswerMode::oracle: return "oracle";
    case AnswerMode::single_pass: return "single_pass";
    case AnswerMode::agentic: return "agentic";
  }
  return "single_pass";
}

AnswerMode answer_mode_from_name(const std::string& name) {
  if (name == "no_evidence") return AnswerMode::no_evidence;
  if (name == "oracle") return AnswerMode::oracle;
  if (name == "single_pass" || name == "single") return AnswerMode::single_pass;
  if (name == "agentic") return AnswerMode::agentic;
  throw Error("unknown answer mode: " + name);
}

std::vector<std::string> AnswerTrace::evidence_ids() const {
  return iterations.empty() ? std::vector<std::string>{}
                            : iterations.back().retrieved_ids;
}

const char* const kAnswerPromptTemplate =
    "You are a memory QA assistant. Use ONLY the provided evidence to answer.\n"
    "If the evidence is insufficient, answer \"Unknown\".\n"
    "Respond with only the answer.\n"
    "If the question asks to recall or list items (photos/emails/videos),\n"
    "respond with the corresponding evidence IDs only, comma-separated, with no "
    "extra text.\n"
    "\n"
    "Question: {{question}}\n"
    "\n"
    "Evidence:\n"
    "{{evidence}}\n"
    "\n"
    "Provide the answer based solely on the evidence.";

std::string render_evidence(const std::vector<MemoryItem>& evidence) {
  std::string out;
  for (const auto& item : evidence) {
    if (!out.empty()) out += "\n\n";
    out += "[" + item.id + "]\n" + render_item(item);
  }
  return out;
}

namespace {

std::string substitute(std::string tmpl, const std::string& marker,
                       const std::string& value) {
  const auto pos = tmpl.find(marker);
  if (pos == std::string::npos) throw Error("template marker missing: " + marker);
  return tmpl.replace(pos, marker.size(), value);
}

}  // namespace

std::string render_answer_prompt(const std::string& question,
                                 const std::vector<MemoryItem>& evidence) {
  std::string prompt = kAnswerPromptTemplate;
  prompt = substitute(std::move(prompt), "{{question}}", question);
  prompt = substitute(std::move(prompt), "{{evidence}}", render_evidence(evidence));
  return prompt;
}

AnswerTrace answer_single_pass(const std::string& question,
                               const std::vector<MemoryItem>& evidence,
                               ChatProvider& chat, AnswerMode mode,
                               const std::vector<std::string>& attachments) {
  std::vector<ChatMessage> messages;
  messages.push_back({"user", render_answer_prompt(question, evidence), attachments});
  std::string reply;
  try {
    reply = chat.chat("answerer", messages);
  } catch (const ProviderFailure& e) {
    throw Error(std::string("answer generation failed: ") + e.what());
  }

  AnswerTrace trace;
  trace.mode = mode;
  trace.final = text::trim(reply);
  AnswerIteration iter;
  iter.query = question;
  for (const auto& item : evidence) iter.retrieved_ids.push_back(item.id);
  trace.iterations.push_back(std::move(iter));
  return trace;
}

namespace {

/// "SUFFICIENT" or "REWRITE: <new query>"; anything else is malformed.
std::string ask_sufficiency(const std::string& question,
                            const std::vector<MemoryItem>& evidence,
                            ChatProvider& chat) {
  std::vector<ChatMessage> messages;
  messages.push_back(
      {"user",
       "Decide whether the evidence below is sufficient to answer the question.\n"
       "Respond with exactly SUFFICIENT, or REWRITE: <a better search query>.\n"
       "\n"
       "Question: " + question + "\n"
       "\n"
       "Evidence:\n" + render_evidence(evidence),
       {}});
  return text::trim(chat.chat("sufficiency", messages));
}

}  // namespace

AnswerTrace answer_agentic(const std::string& question, const MemoryStore& store,
                           const VectorIndex& index, EmbeddingProvider& embedder,
                           ChatProvider& chat, const AgenticConfig& config) {
  if (config.max_iters < 1) throw Error("answer_agentic: max_iters must be >= 1");

  AnswerTrace trace;
  trace.mode = AnswerMode::agentic;

  // evidence ids, most recent retrieval first
  std::vector<std::string> evidence_ids;
  std::string query = question;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    const auto retrieved = retrieve(query, store, index, embedder, &chat,
                                    config.retrieve);
    std::vector<std::string> merged = retrieved;
    for (const auto& id : evidence_ids) {
      if (std::find(merged.begin(), merged.end(), id) == merged.end())
        merged.push_back(id);
    }
    if (merged.size() > static_cast<std::size_t>(config.retrieve.k))
      merged.resize(config.retrieve.k);
    evidence_ids = std::move(merged);

    AnswerIteration record;
    record.query = query;
    record.retrieved_ids = evidence_ids;

    if (iter + 1 == config.max_iters) {
      trace.iterations.push_back(std::move(record));
      break;
    }
    std::string verdict = ask_sufficiency(question, [&] {
      std::vector<MemoryItem> items;
      for (const auto& id : evidence_ids) items.push_back(store.item(id));
      return items;
    }(), chat);
    if (verdict != "SUFFICIENT" && verdict.rfind("REWRITE:", 0) != 0) {
      std::cerr << "warning: malformed sufficiency verdict, treating as "
                   "SUFFICIENT: " << verdict << '\n';
      verdict = "SUFFICIENT";
    }
    record.verdict = verdict;
    const bool done = verdict == "SUFFICIENT";
    if (!done) query = text::trim(verdict.substr(8));
    trace.iterations.push_back(std::move(record));
    if (done) break;
  }

  std::vector<MemoryItem> evidence;
  for (const auto& id : evidence_ids) evidence.push_back(store.item(id));
  AnswerTrace inner = answer_single_pass(question, evidence, chat);
  trace.final = std::move(inner.final);
  // keep the final prompt's evidence as the last iteration's id set
  trace.iterations.back().retrieved_ids = evidence_ids;
  return trace;
}

std::vector<Prediction> answer_questions(const std::vector<QAInstance>& qas,
                                         const MemoryStore& store,
                                         const VectorIndex& index,
                                         EmbeddingProvider& embedder,
                                         ChatProvider& chat, AnswerMode mode,
                                         const RetrieveConfig& retrieve_config,
                                         int max_iters) {
  std::vector<Prediction> preds;
  preds.reserve(qas.size());
  for (const auto& qa : qas) {
    AnswerTrace trace;
    switch (mode) {
      case AnswerMode::no_evidence:
        trace = answer_single_pass(qa.question, {}, chat, mode);
        break;
      case AnswerMode::oracle: {
        std::vector<MemoryItem> evidence;
        for (const auto& id : qa.gold_evidence) evidence.push_back(store.item(id));
        trace = answer_single_pass(qa.question, evidence, chat, mode);
        break;
      }
      case AnswerMode::single_pass: {
        const auto ids =
            retrieve(qa.question, store, index, embedder, &chat, retrieve_config);
        std::vector<MemoryItem> evidence;
        for (const auto& id : ids) evidence.push_back(store.item(id));
        trace = answer_single_pass(qa.question, evidence, chat, mode);
        break;
      }
      case AnswerMode::agentic: {
        AgenticConfig ac;
        ac.retrieve = retrieve_config;
        ac.max_iters = max_iters;
        trace = answer_agentic(qa.question, store, index, embedder, chat, ac);
        break;
      }
    }
    preds.push_back(Prediction{qa.id, trace.final, trace.evidence_ids()});
  }
  return preds;
}

std::vector<std::string> attach_media(const std::vector<MemoryItem>& evidence,
                                      const std::map<std::string, RawRecord>& corpus,
                                      int video_frames) {
  std::vector<std::string> refs;
  for (const auto& item : evidence) {
    auto it = corpus.find(item.id);
    if (it == corpus.end() || !it->second.media_ref) continue;
    const RawRecord& record = it->second;
    const std::string& path = *record.media_ref;
    if (!std::filesystem::exists(path)) {
      std::cerr << "warning: media file missing, skipping attachment: " << path
                << '\n';
      continue;
    }
    if (record.source == Source::image) {
      refs.push_back(path);
    } else if (record.source == Source::video) {
      const int n = std::min(video_frames, 8);
      for (int i = 0; i < n; ++i)
        refs.push_back(path + "#frame" + std::to_string(i));
    }
  }
  return refs;
}

}  // namespace memqa
