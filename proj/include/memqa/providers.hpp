#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "memqa/model.hpp"

namespace memqa {

struct EmbeddingVector {
  std::vector<float> values;
  float norm = 0.0f;

  static EmbeddingVector from_values(std::vector<float> v);
  EmbeddingVector normalized() const;
};

float dot(const EmbeddingVector& a, const EmbeddingVector& b);
float cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class ProviderFailure : public Error {
 public:
  using Error::Error;
};

struct ProviderConfig {
  enum class Kind { mock, remote };
  Kind kind = Kind::mock;
  std::string endpoint;
  std::string model_name;
  double temperature = 0.0;
  std::uint64_t seed = 42;
  double timeout_seconds = 30.0;
  int retries = 2;
  bool strict = true;
  int mock_dimension = 64;

  static ProviderConfig from_json(const std::string& text);
  std::string to_json() const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dimension() const = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  std::vector<std::string> attachments;
};

/// Chat clients serve several pipeline roles (describer, linker, updater,
/// answerer, judge, reranker, sufficiency); the role tag lets mock
/// implementations dispatch while remote ones may ignore it.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string chat(const std::string& role,
                           const std::vector<ChatMessage>& messages) = 0;
};

class Geocoder {
 public:
  virtual ~Geocoder() = default;
  virtual std::string geocode(double lat, double lon) = 0;
};

// --- mocks ----------------------------------------------------------------

/// Deterministic bag-of-tokens embedding: each distinct content token
/// (see text::embedding_tokens) is hashed with the seed into a
/// pseudo-random direction; the sum is unit-normalized. Texts with equal
/// token sets embed identically.
class MockEmbedder : public EmbeddingProvider {
 public:
  explicit MockEmbedder(std::uint64_t seed = 42, int dimension = 64);
  int dimension() const override { return dim_; }
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  EmbeddingVector embed_one(const std::string& text);

 private:
  std::uint64_t seed_;
  int dim_;
};

std::vector<std::string> tokenize(const std::string& text);

/// Replays canned responses keyed by (role, substring pattern). A rule with
/// several responses yields them in sequence, the last one sticking.
class ScriptedChatProvider : public ChatProvider {
 public:
  explicit ScriptedChatProvider(bool strict = true) : strict_(strict) {}

  void add_rule(const std::string& role, const std::string& pattern,
                std::vector<std::string> responses);
  std::string chat(const std::string& role,
                   const std::vector<ChatMessage>& messages) override;

 private:
  struct Rule {
    std::string role;
    std::string pattern;
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  std::vector<Rule> rules_;
  bool strict_;
};

/// Deterministic role-dispatching chat mock covering the full pipeline:
/// captioning, schema extraction, link scoring, memory updating, answering,
/// judging, reranking, and sufficiency verdicts. All behavior is a pure
/// function of the prompt text and the seed.
class MockChatProvider : public ChatProvider {
 public:
  explicit MockChatProvider(std::uint64_t seed = 42);
  std::string chat(const std::string& role,
                   const std::vector<ChatMessage>& messages) override;

 private:
  MockEmbedder embedder_;
};

class MockGeocoder : public Geocoder {
 public:
  MockGeocoder();
  std::string geocode(double lat, double lon) override;

  void add_place(double lat, double lon, const std::string& name);
  void set_fail_mode(bool fail) { fail_ = fail; }
  const std::map<std::pair<int, int>, std::string>& gazetteer() const { return places_; }

 private:
  std::map<std::pair<int, int>, std::string> places_;  // (lat,lon) rounded to 2 decimals
  bool fail_ = false;
};

// --- remote clients (JSON over HTTP) --------------------------------------

class RemoteEmbedder : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(ProviderConfig config);
  int dimension() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  ProviderConfig config_;
  mutable int dim_ = -1;
};

class RemoteChatProvider : public ChatProvider {
 public:
  explicit RemoteChatProvider(ProviderConfig config);
  std::string chat(const std::string& role,
                   const std::vector<ChatMessage>& messages) override;

 private:
  ProviderConfig config_;
};

std::shared_ptr<EmbeddingProvider> make_embedder(const ProviderConfig& config);
std::shared_ptr<ChatProvider> make_chat_provider(const ProviderConfig& config);
std::shared_ptr<Geocoder> make_geocoder(const ProviderConfig& config);

}  // namespace memqa
