#pragma once

/// \file model_clients.hpp
/// Client contracts for the four external model roles (generator, rewriter,
/// embedder, reranker/judge) plus deterministic in-process mocks.
///
/// Wire contract is HTTP + JSON with chat-completion-shaped schemas, so any
/// compatible server can back the pipeline. All mocks are pure functions of
/// (seed, request).

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "verirag/common.hpp"

namespace verirag::clients {

// ---------------------------------------------------------------------------
// Request / response types
// ---------------------------------------------------------------------------

struct Message {
    std::string role;  // "system" or "user"
    std::string content;
};

struct GenerationRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.0;  // evaluation runs are temperature 0
    int max_tokens = 1024;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const noexcept { return values.size(); }
    double dot(const EmbeddingVector& other) const;
    double norm() const;
    /// Cosine similarity; 0 when either vector has zero norm.
    double cosine(const EmbeddingVector& other) const;
    /// Scales to unit length in place. Throws on an all-zero vector.
    void normalize();
};

struct RerankScore {
    std::size_t passage_index = 0;
    double score = 0.0;  // in [0,1] after normalization
};

// ---------------------------------------------------------------------------
// Fingerprints (stable keys for mock scripts and request audit trails)
// ---------------------------------------------------------------------------

std::string fingerprint(const GenerationRequest& request);
std::string fingerprint_embed(const std::string& model, const std::vector<std::string>& texts);
std::string fingerprint_rerank(const std::string& query, const std::vector<std::string>& passages);
/// Per-pair key used by scripted reranker mocks.
std::string fingerprint_rerank_pair(const std::string& query, const std::string& passage);

// ---------------------------------------------------------------------------
// Client interfaces
// ---------------------------------------------------------------------------

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the model's full text. Throws ClientError per taxonomy.
    virtual std::string generate(const GenerationRequest& request) = 0;
    virtual const std::string& model() const = 0;
};

class EmbedClient {
public:
    virtual ~EmbedClient() = default;
    /// One vector per input, order-preserving, uniform dimension.
    /// Throws std::invalid_argument on an empty batch.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

class RerankClient {
public:
    virtual ~RerankClient() = default;
    /// One score per passage in [0,1], input order preserved.
    /// Throws std::invalid_argument on an empty passage list.
    virtual std::vector<RerankScore> rerank(const std::string& query,
                                            const std::vector<std::string>& passages) = 0;
};

// ---------------------------------------------------------------------------
// Retry policy
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 500;  // doubles per retry; only retryable kinds retry
};

/// Runs `attempt` under the retry policy, sleeping between retryable
/// failures. Non-retryable ClientErrors propagate immediately.
std::string with_retries(const RetryPolicy& policy, const std::function<std::string()>& attempt);

// ---------------------------------------------------------------------------
// HTTP clients
// ---------------------------------------------------------------------------

enum class ScoreNormalization { automatic, logistic, none };

struct HttpClientConfig {
    std::string endpoint;                 // e.g. "http://127.0.0.1:8080"
    std::string path;                     // defaults per role
    std::string model;
    std::string api_key_env;              // key material only via environment
    int timeout_ms = 30000;
    RetryPolicy retry;
    int min_request_interval_ms = 0;      // naive per-instance rate limit
    ScoreNormalization normalization = ScoreNormalization::automatic;
};

/// POST {model, messages, temperature, max_tokens}; accepts either an
/// OpenAI-shaped {choices:[{message:{content}}]} body or a flat
/// {content | text} body.
std::unique_ptr<ChatClient> make_http_chat_client(HttpClientConfig config);

/// POST {model, input[]}; accepts {vectors: [[..]]} or {data:[{embedding}]}.
std::unique_ptr<EmbedClient> make_http_embed_client(HttpClientConfig config);

/// POST {query, passages[]} -> {scores[]}. Raw logits are mapped through
/// the logistic function so the evidence threshold stays meaningful.
std::unique_ptr<RerankClient> make_http_rerank_client(HttpClientConfig config);

// ---------------------------------------------------------------------------
// Mocks
// ---------------------------------------------------------------------------

/// Scripted chat mock keyed by request fingerprint. Script files are JSONL
/// of {"request_fingerprint": ..., "response": ...}. A missing key raises
/// invalid_response unless a fallback is installed.
class ScriptedChatClient : public ChatClient {
public:
    explicit ScriptedChatClient(std::string model = "scripted");

    static ScriptedChatClient from_jsonl(const std::string& path, std::string model = "scripted");

    void script(const std::string& request_fingerprint, std::string response);
    /// Convenience: scripts the response for this exact request.
    void script_request(const GenerationRequest& request, std::string response);
    void set_fallback(std::function<std::string(const GenerationRequest&)> fallback);

    std::string generate(const GenerationRequest& request) override;
    const std::string& model() const override { return model_; }

private:
    std::string model_;
    std::unordered_map<std::string, std::string> responses_;
    std::function<std::string(const GenerationRequest&)> fallback_;
};

/// Deterministic, seed-keyed chat mock that understands the pipeline's own
/// prompt templates: it answers generation prompts with a short cited
/// rationale and a final-answer line, rewrite prompts by expanding known
/// acronyms, and judge prompts by rule-based labeling against the shown
/// documents. Pure function of (seed, request).
class SyntheticChatClient : public ChatClient {
public:
    explicit SyntheticChatClient(std::uint64_t seed = 0, std::string model = "synthetic");

    std::string generate(const GenerationRequest& request) override;
    const std::string& model() const override { return model_; }

private:
    std::uint64_t seed_;
    std::string model_;
};

/// Hash-based embedder: dimension-64 unit vectors derived from token
/// hashes. Identical texts embed identically; no model required.
class HashEmbedClient : public EmbedClient {
public:
    explicit HashEmbedClient(std::size_t dim = 64, std::uint64_t seed = 0);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::size_t dimension() const noexcept { return dim_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Scripted reranker keyed by (query, passage) pair fingerprints, with an
/// optional lexical fallback.
class ScriptedRerankClient : public RerankClient {
public:
    ScriptedRerankClient() = default;

    static ScriptedRerankClient from_jsonl(const std::string& path);

    void script(const std::string& query, const std::string& passage, double score);
    void set_fallback_lexical(bool enabled) { lexical_fallback_ = enabled; }

    std::vector<RerankScore> rerank(const std::string& query,
                                    const std::vector<std::string>& passages) override;

private:
    std::unordered_map<std::string, double> scores_;
    bool lexical_fallback_ = false;
};

/// Deterministic lexical reranker: score is the fraction of the query's
/// distinct non-stopword tokens found in the passage.
class SyntheticRerankClient : public RerankClient {
public:
    std::vector<RerankScore> rerank(const std::string& query,
                                    const std::vector<std::string>& passages) override;
};

// ---------------------------------------------------------------------------
// Request audit trail
// ---------------------------------------------------------------------------

struct RequestRecord {
    std::string kind;  // "generate" | "embed" | "rerank"
    std::string fingerprint;
};

using RequestLog = std::vector<RequestRecord>;

/// Decorators that append a fingerprint record per call. The pipeline wraps
/// its clients per query so every trace lists the exact requests issued.
class RecordingChatClient : public ChatClient {
public:
    RecordingChatClient(ChatClient& inner, RequestLog& log) : inner_(inner), log_(log) {}
    std::string generate(const GenerationRequest& request) override;
    const std::string& model() const override { return inner_.model(); }

private:
    ChatClient& inner_;
    RequestLog& log_;
};

class RecordingEmbedClient : public EmbedClient {
public:
    RecordingEmbedClient(EmbedClient& inner, RequestLog& log, std::string model = "")
        : inner_(inner), log_(log), model_(std::move(model)) {}
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    EmbedClient& inner_;
    RequestLog& log_;
    std::string model_;
};

class RecordingRerankClient : public RerankClient {
public:
    RecordingRerankClient(RerankClient& inner, RequestLog& log) : inner_(inner), log_(log) {}
    std::vector<RerankScore> rerank(const std::string& query,
                                    const std::vector<std::string>& passages) override;

private:
    RerankClient& inner_;
    RequestLog& log_;
};

/// Logistic squashing used to normalize raw reranker logits into [0,1].
double logistic(double x);

}  // namespace verirag::clients
