#include "verirag/model_clients.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "verirag/corpus_index.hpp"
#include "verirag/jsonl.hpp"

namespace verirag::clients {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// EmbeddingVector
// ---------------------------------------------------------------------------

double EmbeddingVector::dot(const EmbeddingVector& other) const {
    if (values.size() != other.values.size()) {
        throw std::invalid_argument("embedding dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[i] * other.values[i];
    return sum;
}

double EmbeddingVector::norm() const {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

double EmbeddingVector::cosine(const EmbeddingVector& other) const {
    const double denom = norm() * other.norm();
    if (denom == 0.0) return 0.0;
    return dot(other) / denom;
}

void EmbeddingVector::normalize() {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize an all-zero embedding");
    for (double& v : values) v /= n;
}

// ---------------------------------------------------------------------------
// Fingerprints
// ---------------------------------------------------------------------------

namespace {
constexpr char kFieldSep = '\x1e';
constexpr char kItemSep = '\x1f';

std::string format_double_key(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
}  // namespace

std::string fingerprint(const GenerationRequest& request) {
    std::string canon = "chat";
    canon += kFieldSep;
    canon += request.model;
    canon += kFieldSep;
    canon += format_double_key(request.temperature);
    canon += kFieldSep;
    canon += std::to_string(request.max_tokens);
    for (const auto& m : request.messages) {
        canon += kFieldSep;
        canon += m.role;
        canon += kItemSep;
        canon += m.content;
    }
    return to_hex(fnv1a64(canon));
}

std::string fingerprint_embed(const std::string& model, const std::vector<std::string>& texts) {
    std::string canon = "embed";
    canon += kFieldSep;
    canon += model;
    for (const auto& t : texts) {
        canon += kItemSep;
        canon += t;
    }
    return to_hex(fnv1a64(canon));
}

std::string fingerprint_rerank(const std::string& query, const std::vector<std::string>& passages) {
    std::string canon = "rerank";
    canon += kFieldSep;
    canon += query;
    for (const auto& p : passages) {
        canon += kItemSep;
        canon += p;
    }
    return to_hex(fnv1a64(canon));
}

std::string fingerprint_rerank_pair(const std::string& query, const std::string& passage) {
    std::string canon = "rerankpair";
    canon += kFieldSep;
    canon += query;
    canon += kItemSep;
    canon += passage;
    return to_hex(fnv1a64(canon));
}

// ---------------------------------------------------------------------------
// Retry
// ---------------------------------------------------------------------------

std::string with_retries(const RetryPolicy& policy, const std::function<std::string()>& attempt) {
    int backoff = policy.backoff_ms;
    for (int i = 1;; ++i) {
        try {
            return attempt();
        } catch (const ClientError& e) {
            if (!e.retryable() || i >= policy.max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
    }
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// HTTP clients
// ---------------------------------------------------------------------------

namespace {

class HttpBase {
public:
    explicit HttpBase(HttpClientConfig config) : config_(std::move(config)) {}

protected:
    /// POST `body` to the configured path and parse the JSON response.
    json post_json(const std::string& path, const json& body);

    HttpClientConfig config_;

private:
    void rate_limit();

    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace
}  // namespace verirag::clients

// httplib pulls in a large header; keep it out of our public headers.
#include <httplib.h>

namespace verirag::clients {
namespace {

void HttpBase::rate_limit() {
    if (config_.min_request_interval_ms <= 0) return;
    std::lock_guard<std::mutex> lock(rate_mutex_);
    const auto now = std::chrono::steady_clock::now();
    const auto interval = std::chrono::milliseconds(config_.min_request_interval_ms);
    if (last_request_.time_since_epoch().count() != 0 && now - last_request_ < interval) {
        std::this_thread::sleep_for(interval - (now - last_request_));
    }
    last_request_ = std::chrono::steady_clock::now();
}

json HttpBase::post_json(const std::string& path, const json& body) {
    rate_limit();
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
        throw ClientError(ClientErrorKind::transport, httplib::to_string(res.error()), true);
    }
    if (res->status == 429) {
        throw ClientError(ClientErrorKind::rate_limited, "HTTP 429", true);
    }
    if (res->status >= 500) {
        throw ClientError(ClientErrorKind::transport, "HTTP " + std::to_string(res->status), true);
    }
    if (res->status != 200) {
        throw ClientError(ClientErrorKind::protocol, "HTTP " + std::to_string(res->status), false);
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception& e) {
        throw ClientError(ClientErrorKind::invalid_response, std::string("bad JSON body: ") + e.what(), false);
    }
}

class HttpChatClient : public ChatClient, HttpBase {
public:
    explicit HttpChatClient(HttpClientConfig config) : HttpBase(std::move(config)) {
        if (config_.path.empty()) config_.path = "/v1/chat/completions";
    }

    std::string generate(const GenerationRequest& request) override {
        return with_retries(config_.retry, [&] {
            json messages = json::array();
            for (const auto& m : request.messages) {
                messages.push_back({{"role", m.role}, {"content", m.content}});
            }
            json body = {{"model", request.model.empty() ? config_.model : request.model},
                         {"messages", std::move(messages)},
                         {"temperature", request.temperature},
                         {"max_tokens", request.max_tokens}};
            json response = post_json(config_.path, body);
            if (response.contains("choices") && response["choices"].is_array() &&
                !response["choices"].empty()) {
                const json& choice = response["choices"][0];
                if (choice.contains("message") && choice["message"].contains("content") &&
                    choice["message"]["content"].is_string()) {
                    return choice["message"]["content"].get<std::string>();
                }
                if (choice.contains("text") && choice["text"].is_string()) {
                    return choice["text"].get<std::string>();
                }
            }
            for (const char* field : {"content", "text"}) {
                if (response.contains(field) && response[field].is_string()) {
                    return response[field].get<std::string>();
                }
            }
            throw ClientError(ClientErrorKind::invalid_response, "no completion text in response", false);
        });
    }

    const std::string& model() const override { return config_.model; }
};

class HttpEmbedClient : public EmbedClient, HttpBase {
public:
    explicit HttpEmbedClient(HttpClientConfig config) : HttpBase(std::move(config)) {
        if (config_.path.empty()) config_.path = "/v1/embeddings";
    }

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
        if (texts.empty()) throw std::invalid_argument("embed: texts must be non-empty");
        with_retries(config_.retry, [&] {
            json body = {{"model", config_.model}, {"input", texts}};
            json response = post_json(config_.path, body);
            result_ = parse_vectors(response, texts.size());
            return std::string();
        });
        return std::move(result_);
    }

private:
    static std::vector<EmbeddingVector> parse_vectors(const json& response, std::size_t expected) {
        std::vector<EmbeddingVector> out;
        auto push = [&](const json& arr) {
            EmbeddingVector v;
            for (const auto& x : arr) v.values.push_back(x.get<double>());
            out.push_back(std::move(v));
        };
        try {
            if (response.contains("vectors") && response["vectors"].is_array()) {
                for (const auto& arr : response["vectors"]) push(arr);
            } else if (response.contains("data") && response["data"].is_array()) {
                for (const auto& item : response["data"]) push(item.at("embedding"));
            }
        } catch (const json::exception& e) {
            throw ClientError(ClientErrorKind::invalid_response, e.what(), false);
        }
        if (out.size() != expected) {
            throw ClientError(ClientErrorKind::invalid_response,
                              "expected " + std::to_string(expected) + " vectors, got " +
                                  std::to_string(out.size()),
                              false);
        }
        for (const auto& v : out) {
            if (v.dimension() != out.front().dimension()) {
                throw ClientError(ClientErrorKind::invalid_response, "embedding dimension mismatch", false);
            }
        }
        return out;
    }

    std::vector<EmbeddingVector> result_;
};

class HttpRerankClient : public RerankClient, HttpBase {
public:
    explicit HttpRerankClient(HttpClientConfig config) : HttpBase(std::move(config)) {
        if (config_.path.empty()) config_.path = "/rerank";
    }

    std::vector<RerankScore> rerank(const std::string& query,
                                    const std::vector<std::string>& passages) override {
        if (passages.empty()) throw std::invalid_argument("rerank: passages must be non-empty");
        std::vector<RerankScore> result;
        with_retries(config_.retry, [&] {
            json body = {{"query", query}, {"passages", passages}};
            json response = post_json(config_.path, body);
            if (!response.contains("scores") || !response["scores"].is_array() ||
                response["scores"].size() != passages.size()) {
                throw ClientError(ClientErrorKind::invalid_response, "missing or mis-sized scores array",
                                  false);
            }
            std::vector<double> raw;
            for (const auto& s : response["scores"]) raw.push_back(s.get<double>());
            result = normalize_scores(raw);
            return std::string();
        });
        return result;
    }

private:
    std::vector<RerankScore> normalize_scores(const std::vector<double>& raw) const {
        bool out_of_range =
            std::any_of(raw.begin(), raw.end(), [](double s) { return s < 0.0 || s > 1.0; });
        bool apply_logistic = config_.normalization == ScoreNormalization::logistic ||
                              (config_.normalization == ScoreNormalization::automatic && out_of_range);
        if (out_of_range && config_.normalization == ScoreNormalization::none) {
            throw ClientError(ClientErrorKind::invalid_response, "rerank score outside [0,1]", false);
        }
        std::vector<RerankScore> out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            out.push_back({i, apply_logistic ? logistic(raw[i]) : raw[i]});
        }
        return out;
    }
};

}  // namespace

std::unique_ptr<ChatClient> make_http_chat_client(HttpClientConfig config) {
    return std::make_unique<HttpChatClient>(std::move(config));
}

std::unique_ptr<EmbedClient> make_http_embed_client(HttpClientConfig config) {
    return std::make_unique<HttpEmbedClient>(std::move(config));
}

std::unique_ptr<RerankClient> make_http_rerank_client(HttpClientConfig config) {
    return std::make_unique<HttpRerankClient>(std::move(config));
}

// ---------------------------------------------------------------------------
// Scripted chat mock
// ---------------------------------------------------------------------------

ScriptedChatClient::ScriptedChatClient(std::string model) : model_(std::move(model)) {}

ScriptedChatClient ScriptedChatClient::from_jsonl(const std::string& path, std::string model) {
    ScriptedChatClient client(std::move(model));
    for_each_jsonl(path, [&](const json& j, std::size_t line) {
        if (!j.contains("request_fingerprint") || !j.contains("response")) {
            throw DataError(path, line, "mock script entries need request_fingerprint and response");
        }
        client.script(j["request_fingerprint"].get<std::string>(), j["response"].get<std::string>());
    });
    return client;
}

void ScriptedChatClient::script(const std::string& request_fingerprint, std::string response) {
    responses_[request_fingerprint] = std::move(response);
}

void ScriptedChatClient::script_request(const GenerationRequest& request, std::string response) {
    script(fingerprint(request), std::move(response));
}

void ScriptedChatClient::set_fallback(std::function<std::string(const GenerationRequest&)> fallback) {
    fallback_ = std::move(fallback);
}

std::string ScriptedChatClient::generate(const GenerationRequest& request) {
    auto it = responses_.find(fingerprint(request));
    if (it != responses_.end()) return it->second;
    if (fallback_) return fallback_(request);
    throw ClientError(ClientErrorKind::invalid_response,
                      "no scripted response for fingerprint " + fingerprint(request), false);
}

// ---------------------------------------------------------------------------
// Synthetic chat mock
// ---------------------------------------------------------------------------

namespace {

struct ParsedPrompt {
    std::vector<std::string> documents;
    std::string question;
    std::string statement;
};

/// Pulls "Document [i] ...", "Question: ..." and "Statement: ..." lines out
/// of a rendered prompt. Only lines after the last demonstration block
/// count as the evaluation documents.
ParsedPrompt parse_prompt_lines(const std::string& user) {
    ParsedPrompt parsed;
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= user.size()) {
        std::size_t end = user.find('\n', start);
        if (end == std::string::npos) end = user.size();
        lines.push_back(user.substr(start, end - start));
        start = end + 1;
    }
    std::size_t block_start = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].rfind("FINAL ANSWER:", 0) == 0 || lines[i].rfind("ANSWER UNAVAILABLE", 0) == 0) {
            block_start = i + 1;
        }
    }
    for (std::size_t i = block_start; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.rfind("Document [", 0) == 0) {
            std::size_t close = line.find("] ");
            if (close != std::string::npos) parsed.documents.push_back(line.substr(close + 2));
        } else if (line.rfind("Question: ", 0) == 0) {
            parsed.question = line.substr(10);
        } else if (line.rfind("Statement: ", 0) == 0) {
            parsed.statement = line.substr(11);
        }
    }
    return parsed;
}

std::string first_tokens(const std::string& text, std::size_t n) {
    std::string out;
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size() && count < n) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t begin = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > begin) {
            if (!out.empty()) out += ' ';
            out += text.substr(begin, i - begin);
            ++count;
        }
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ';')) out.pop_back();
    return out;
}

const std::vector<std::pair<std::string, std::string>>& acronym_expansions() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"ASA", "acetylsalicylic acid (aspirin)"},
        {"MI", "myocardial infarction"},
        {"HTN", "hypertension"},
        {"T2DM", "type 2 diabetes mellitus"},
        {"CVD", "cardiovascular disease"},
        {"BP", "blood pressure"},
        {"CAD", "coronary artery disease"},
        {"COPD", "chronic obstructive pulmonary disease"},
        {"UTI", "urinary tract infection"},
        {"HRT", "hormone replacement therapy"},
        {"PPI", "proton pump inhibitor"},
        {"SSRI", "selective serotonin reuptake inhibitor"},
    };
    return table;
}

bool is_word_boundary(const std::string& s, std::size_t pos) {
    return pos >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos]));
}

std::string expand_acronyms(const std::string& question) {
    std::string out = question;
    for (const auto& [acronym, expansion] : acronym_expansions()) {
        std::size_t pos = 0;
        while ((pos = out.find(acronym, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(out[pos - 1]));
            if (left_ok && is_word_boundary(out, pos + acronym.size())) {
                out = out.substr(0, pos) + expansion + out.substr(pos + acronym.size());
                pos += expansion.size();
            } else {
                pos += acronym.size();
            }
        }
    }
    return out;
}

std::string judge_statement(const ParsedPrompt& parsed) {
    using verirag::index::english_stopwords;
    using verirag::index::normalize_and_tokenize;

    auto joined = [](const std::vector<std::string>& tokens) {
        std::string out;
        for (const auto& t : tokens) {
            if (!out.empty()) out += ' ';
            out += t;
        }
        return out;
    };

    const auto stmt_tokens = normalize_and_tokenize(parsed.statement, false);
    const std::string stmt_norm = joined(stmt_tokens);
    bool stmt_neg = false;
    for (const auto& t : stmt_tokens) {
        if (t == "not" || t == "no" || t == "cannot") stmt_neg = true;
    }
    std::unordered_set<std::string> content;
    for (const auto& t : normalize_and_tokenize(parsed.statement, english_stopwords(), true)) {
        content.insert(t);
    }

    std::unordered_set<std::string> doc_vocab;
    bool explicit_match = false;
    bool negation_conflict = false;
    for (const auto& doc : parsed.documents) {
        const auto doc_tokens = normalize_and_tokenize(doc, false);
        const std::string doc_norm = joined(doc_tokens);
        for (const auto& t : doc_tokens) doc_vocab.insert(t);
        if (!stmt_norm.empty() && doc_norm.find(stmt_norm) != std::string::npos) {
            explicit_match = true;
        }
        bool doc_neg = false;
        for (const auto& t : doc_tokens) {
            if (t == "not" || t == "no" || t == "cannot") doc_neg = true;
        }
        bool all_content_present = !content.empty();
        std::unordered_set<std::string> this_doc(doc_tokens.begin(), doc_tokens.end());
        for (const auto& t : content) {
            if (!this_doc.count(t)) all_content_present = false;
        }
        if (all_content_present && stmt_neg != doc_neg) negation_conflict = true;
    }

    std::size_t present = 0;
    for (const auto& t : content) {
        if (doc_vocab.count(t)) ++present;
    }

    std::string label;
    if (explicit_match) {
        label = "CORRECT-EXPLICIT";
    } else if (negation_conflict) {
        label = "INCORRECT-FALSE";
    } else if (content.empty()) {
        label = "INCORRECT-MISSING";
    } else {
        const double coverage = static_cast<double>(present) / static_cast<double>(content.size());
        if (coverage >= 0.75) {
            label = "CORRECT-IMPLICIT";
        } else if (coverage >= 0.5) {
            label = "CORRECT-ADDITIONAL";
        } else if (coverage >= 0.25) {
            label = "INCORRECT-DEVIATING";
        } else if (coverage > 0.0) {
            label = "INCORRECT-ILLOGICAL";
        } else {
            label = "INCORRECT-MISSING";
        }
    }
    return "LABEL: " + label + "\nREASON: matched " + std::to_string(present) + " of " +
           std::to_string(content.size()) + " content tokens against " +
           std::to_string(parsed.documents.size()) + " documents.";
}

}  // namespace

SyntheticChatClient::SyntheticChatClient(std::uint64_t seed, std::string model)
    : seed_(seed), model_(std::move(model)) {}

std::string SyntheticChatClient::generate(const GenerationRequest& request) {
    if (request.messages.empty()) {
        throw ClientError(ClientErrorKind::protocol, "request has no messages", false);
    }
    std::string system;
    std::string user;
    for (const auto& m : request.messages) {
        if (m.role == "system") system = m.content;
        if (m.role == "user") user = m.content;
    }
    if (user.empty()) {
        throw ClientError(ClientErrorKind::protocol, "request has no user message", false);
    }

    if (system.find("Return only the rewritten question") != std::string::npos) {
        return expand_acronyms(trim(user));
    }

    ParsedPrompt parsed = parse_prompt_lines(user);
    if (system.find("LABEL:") != std::string::npos) {
        return judge_statement(parsed);
    }

    // Generation mode: a short cited rationale plus an answer line that
    // depends deterministically on question, evidence and demo count.
    if (parsed.documents.empty()) return "ANSWER UNAVAILABLE";

    std::string evidence_key;
    for (const auto& doc : parsed.documents) evidence_key += first_tokens(doc, 4) + "|";
    std::size_t demo_count = 0;
    for (std::size_t pos = 0; (pos = user.find("FINAL ANSWER:", pos)) != std::string::npos; ++pos) {
        ++demo_count;
    }
    const std::uint64_t h = fnv1a64(parsed.question + "#" + evidence_key + "#" +
                                        std::to_string(parsed.documents.size()) + "#" +
                                        std::to_string(demo_count),
                                    0xcbf29ce484222325ull ^ seed_);

    std::string rationale =
        "Document [1] reports that " + first_tokens(parsed.documents.front(), 10) + ".";
    switch ((h >> 4) % 4) {
        case 0:
            rationale += " However, the evidence base remains limited in scope.";
            break;
        case 1:
            rationale += " Therefore, the documents point to a consistent conclusion.";
            break;
        case 2:
            rationale += " The remaining documents do not contradict this finding.";
            break;
        default:
            if (parsed.documents.size() > 1) {
                rationale += " This matches Document [2], which suggests a similar effect.";
            } else {
                rationale += " Therefore, the documents point to a consistent conclusion.";
            }
            break;
    }

    const bool pubmedqa = system.find("C. maybe") != std::string::npos;
    if (h % 37 == 0) {
        return rationale + "\nANSWER UNAVAILABLE";
    }
    const std::uint64_t pick = (h >> 8) % (pubmedqa ? 3 : 2);
    const char* line = pick == 0 ? "FINAL ANSWER: A. yes"
                     : pick == 1 ? "FINAL ANSWER: B. no"
                                 : "FINAL ANSWER: C. maybe";
    return rationale + "\n" + line;
}

// ---------------------------------------------------------------------------
// Hash embedder
// ---------------------------------------------------------------------------

HashEmbedClient::HashEmbedClient(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::vector<EmbeddingVector> HashEmbedClient::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw std::invalid_argument("embed: texts must be non-empty");
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        EmbeddingVector v;
        v.values.assign(dim_, 0.0);
        for (const auto& token : index::normalize_and_tokenize(text, false)) {
            const std::uint64_t h = fnv1a64(token, 0xcbf29ce484222325ull ^ seed_);
            const std::size_t slot = static_cast<std::size_t>(h % dim_);
            v.values[slot] += ((h >> 32) & 1) ? 1.0 : -1.0;
        }
        if (v.norm() == 0.0) v.values[0] = 1.0;  // embeddings are never all-zero
        v.normalize();
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rerank mocks
// ---------------------------------------------------------------------------

ScriptedRerankClient ScriptedRerankClient::from_jsonl(const std::string& path) {
    ScriptedRerankClient client;
    for_each_jsonl(path, [&](const json& j, std::size_t line) {
        if (!j.contains("request_fingerprint") || !j.contains("score")) {
            throw DataError(path, line, "rerank script entries need request_fingerprint and score");
        }
        client.scores_[j["request_fingerprint"].get<std::string>()] = j["score"].get<double>();
    });
    return client;
}

void ScriptedRerankClient::script(const std::string& query, const std::string& passage, double score) {
    scores_[fingerprint_rerank_pair(query, passage)] = score;
}

std::vector<RerankScore> ScriptedRerankClient::rerank(const std::string& query,
                                                      const std::vector<std::string>& passages) {
    if (passages.empty()) throw std::invalid_argument("rerank: passages must be non-empty");
    std::vector<RerankScore> out;
    out.reserve(passages.size());
    SyntheticRerankClient lexical;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        auto it = scores_.find(fingerprint_rerank_pair(query, passages[i]));
        if (it != scores_.end()) {
            out.push_back({i, it->second});
        } else if (lexical_fallback_) {
            out.push_back({i, lexical.rerank(query, {passages[i]}).front().score});
        } else {
            throw ClientError(ClientErrorKind::invalid_response,
                              "no scripted rerank score for passage " + std::to_string(i), false);
        }
    }
    return out;
}

std::vector<RerankScore> SyntheticRerankClient::rerank(const std::string& query,
                                                       const std::vector<std::string>& passages) {
    if (passages.empty()) throw std::invalid_argument("rerank: passages must be non-empty");
    const auto query_tokens =
        index::normalize_and_tokenize(query, index::english_stopwords(), true);
    std::unordered_set<std::string> distinct(query_tokens.begin(), query_tokens.end());
    std::vector<RerankScore> out;
    out.reserve(passages.size());
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (distinct.empty()) {
            out.push_back({i, 0.0});
            continue;
        }
        const auto passage_tokens = index::normalize_and_tokenize(passages[i], false);
        std::unordered_set<std::string> vocab(passage_tokens.begin(), passage_tokens.end());
        std::size_t present = 0;
        for (const auto& t : distinct) {
            if (vocab.count(t)) ++present;
        }
        out.push_back({i, static_cast<double>(present) / static_cast<double>(distinct.size())});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recording decorators
// ---------------------------------------------------------------------------

std::string RecordingChatClient::generate(const GenerationRequest& request) {
    log_.push_back({"generate", fingerprint(request)});
    return inner_.generate(request);
}

std::vector<EmbeddingVector> RecordingEmbedClient::embed(const std::vector<std::string>& texts) {
    log_.push_back({"embed", fingerprint_embed(model_, texts)});
    return inner_.embed(texts);
}

std::vector<RerankScore> RecordingRerankClient::rerank(const std::string& query,
                                                       const std::vector<std::string>& passages) {
    log_.push_back({"rerank", fingerprint_rerank(query, passages)});
    return inner_.rerank(query, passages);
}

}  // namespace verirag::clients
