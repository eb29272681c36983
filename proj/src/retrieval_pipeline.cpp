#include "verirag/retrieval_pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include "verirag/jsonl.hpp"

namespace verirag::pipeline {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (m < 1 || m > k) throw std::invalid_argument("config: require 1 <= m <= k");
    if (tau_ovlp < 0.0 || tau_ovlp > 1.0 || tau_evid < 0.0 || tau_evid > 1.0) {
        throw std::invalid_argument("config: thresholds must lie in [0,1]");
    }
    if (shots > 4) throw std::invalid_argument("config: shots must be in 0..4");
    if (context_j > m) throw std::invalid_argument("config: context_j must be in 0..m");
    if (dedup_threshold <= 0.0 || dedup_threshold > 1.0) {
        throw std::invalid_argument("config: dedup_threshold must be in (0,1]");
    }
    if (diversity_threshold <= 0.0 || diversity_threshold > 1.0) {
        throw std::invalid_argument("config: diversity_threshold must be in (0,1]");
    }
}

EvidenceSet rerank(clients::RerankClient& client, const std::string& query,
                   const std::vector<index::ScoredPassage>& candidates, std::size_t m) {
    if (candidates.empty()) throw std::invalid_argument("rerank: candidates must be non-empty");
    if (m < 1) throw std::invalid_argument("rerank: m must be >= 1");

    std::vector<std::string> texts;
    texts.reserve(candidates.size());
    for (const auto& c : candidates) texts.push_back(c.text);
    const auto scores = client.rerank(query, texts);
    if (scores.size() != candidates.size()) {
        throw ClientError(ClientErrorKind::invalid_response, "rerank returned wrong score count",
                          false);
    }

    std::vector<index::ScoredPassage> scored = candidates;
    for (const auto& s : scores) {
        if (s.passage_index >= scored.size()) {
            throw ClientError(ClientErrorKind::invalid_response, "rerank index out of range", false);
        }
        scored[s.passage_index].rerank_score = s.score;
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (*a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
        if (a.bm25_score != b.bm25_score) return a.bm25_score > b.bm25_score;
        return a.doc_id < b.doc_id;
    });

    EvidenceSet evidence;
    evidence.short_set = scored.size() < m;
    if (scored.size() > m) scored.resize(m);
    evidence.passages = std::move(scored);
    evidence.evidence_e = evidence_score(evidence);
    return evidence;
}

double overlap(const std::string& query, const EvidenceSet& evidence,
               const index::StopwordSet& stopwords) {
    const auto query_tokens = index::normalize_and_tokenize(query, stopwords, true);
    std::unordered_set<std::string> distinct(query_tokens.begin(), query_tokens.end());
    if (distinct.empty()) return 0.0;  // degenerate: all-stopword query

    std::unordered_set<std::string> evidence_vocab;
    for (const auto& passage : evidence.passages) {
        for (auto& token : index::normalize_and_tokenize(passage.text, false)) {
            evidence_vocab.insert(std::move(token));
        }
    }
    std::size_t present = 0;
    for (const auto& token : distinct) {
        if (evidence_vocab.count(token)) ++present;
    }
    return static_cast<double>(present) / static_cast<double>(distinct.size());
}

double overlap(const std::string& query, const EvidenceSet& evidence) {
    return overlap(query, evidence, index::english_stopwords());
}

double evidence_score(const EvidenceSet& evidence) {
    if (evidence.passages.empty()) {
        throw std::invalid_argument("evidence_score: undefined for an empty evidence set");
    }
    double sum = 0.0;
    for (const auto& passage : evidence.passages) {
        sum += passage.rerank_score.value_or(0.0);
    }
    return sum / static_cast<double>(evidence.passages.size());
}

bool should_rewrite(double s, double e, const PipelineConfig& cfg) {
    return s < cfg.tau_ovlp || e < cfg.tau_evid;
}

RewriteResult rewrite_query(clients::ChatClient& client, const std::string& query) {
    clients::GenerationRequest request;
    request.model = client.model();
    request.messages = {{"system", rationale::rewrite_system_prompt()}, {"user", query}};
    try {
        std::string rewritten = trim(client.generate(request));
        if (rewritten.empty()) return {query, true};
        return {std::move(rewritten), false};
    } catch (const ClientError&) {
        return {query, true};
    }
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

namespace {

json passage_to_json(const index::ScoredPassage& p) {
    json j;
    j["doc_id"] = p.doc_id;
    j["text"] = p.text;
    j["bm25_score"] = p.bm25_score;
    j["rerank_score"] = p.rerank_score ? json(*p.rerank_score) : json(nullptr);
    return j;
}

index::ScoredPassage passage_from_json(const json& j) {
    index::ScoredPassage p;
    p.doc_id = j.at("doc_id").get<std::string>();
    p.text = j.at("text").get<std::string>();
    p.bm25_score = j.at("bm25_score").get<double>();
    if (!j.at("rerank_score").is_null()) p.rerank_score = j.at("rerank_score").get<double>();
    return p;
}

json passages_to_json(const std::vector<index::ScoredPassage>& passages) {
    json arr = json::array();
    for (const auto& p : passages) arr.push_back(passage_to_json(p));
    return arr;
}

std::vector<index::ScoredPassage> passages_from_json(const json& arr) {
    std::vector<index::ScoredPassage> out;
    for (const auto& j : arr) out.push_back(passage_from_json(j));
    return out;
}

json evidence_to_json(const EvidenceSet& e) {
    json j;
    j["passages"] = passages_to_json(e.passages);
    j["overlap_s"] = e.overlap_s;
    j["evidence_e"] = e.evidence_e;
    j["short_set"] = e.short_set;
    j["degenerate_overlap"] = e.degenerate_overlap;
    return j;
}

EvidenceSet evidence_from_json(const json& j) {
    EvidenceSet e;
    e.passages = passages_from_json(j.at("passages"));
    e.overlap_s = j.at("overlap_s").get<double>();
    e.evidence_e = j.at("evidence_e").get<double>();
    e.short_set = j.at("short_set").get<bool>();
    e.degenerate_overlap = j.at("degenerate_overlap").get<bool>();
    return e;
}

json verification_to_json(const verification::RationaleVerdict& v) {
    json statements = json::array();
    for (const auto& sv : v.verdicts) {
        json s;
        s["index"] = sv.statement.index;
        s["sentence_index"] = sv.statement.sentence_index;
        s["text"] = sv.statement.text;
        s["label"] = verification::to_string(sv.label);
        s["supported"] = sv.supported;
        s["judge_rationale"] = sv.judge_rationale;
        s["invalid_output"] = sv.invalid_output;
        statements.push_back(std::move(s));
    }
    json j;
    j["statements"] = std::move(statements);
    j["faithfulness"] = v.faithfulness;
    j["overall"] = v.overall_correct ? "CORRECT" : "INCORRECT";
    j["context_j"] = v.context_j;
    return j;
}

verification::RationaleVerdict verification_from_json(const json& j) {
    verification::RationaleVerdict v;
    for (const auto& s : j.at("statements")) {
        verification::StatementVerdict sv;
        sv.statement.index = s.at("index").get<std::size_t>();
        sv.statement.sentence_index = s.at("sentence_index").get<std::size_t>();
        sv.statement.text = s.at("text").get<std::string>();
        sv.label = verification::verification_label_from_string(s.at("label").get<std::string>());
        sv.supported = s.at("supported").get<bool>();
        sv.judge_rationale = s.at("judge_rationale").get<std::string>();
        sv.invalid_output = s.at("invalid_output").get<bool>();
        v.verdicts.push_back(std::move(sv));
    }
    v.faithfulness = j.at("faithfulness").get<double>();
    v.overall_correct = j.at("overall").get<std::string>() == "CORRECT";
    v.context_j = j.at("context_j").get<std::size_t>();
    return v;
}

}  // namespace

json trace_to_json(const PipelineTrace& trace) {
    json j;
    j["query_id"] = trace.query_id;
    j["original_query"] = trace.original_query;
    j["rewritten_query"] = trace.rewritten_query ? json(*trace.rewritten_query) : json(nullptr);
    j["rewrite_triggered"] = trace.rewrite_triggered;
    j["rewrite_fallback"] = trace.rewrite_fallback;
    j["trigger_overlap_s"] = trace.trigger_overlap_s;
    j["trigger_evidence_e"] = trace.trigger_evidence_e;
    j["candidates_initial"] = passages_to_json(trace.candidates_initial);
    j["candidates_rewritten"] = passages_to_json(trace.candidates_rewritten);
    j["evidence"] = evidence_to_json(trace.evidence);
    j["demo_ids"] = trace.demo_ids;
    j["demos_short"] = trace.demos_short;
    j["generation"] = {{"raw", trace.generation.raw},
                       {"rationale", trace.generation.rationale},
                       {"answer", to_string(trace.generation.answer)},
                       {"parse_ok", trace.generation.parse_ok},
                       {"letter_word_conflict", trace.generation.letter_word_conflict},
                       {"empty_rationale", trace.generation.empty_rationale}};
    j["verification"] =
        trace.verification ? verification_to_json(*trace.verification) : json(nullptr);
    j["faithfulness"] = trace.faithfulness ? json(*trace.faithfulness) : json(nullptr);
    j["error"] = trace.error;
    j["error_detail"] = trace.error_detail;
    json requests = json::array();
    for (const auto& r : trace.requests) {
        requests.push_back({{"kind", r.kind}, {"fingerprint", r.fingerprint}});
    }
    j["requests"] = std::move(requests);
    if (trace.latency_ms) j["latency_ms"] = *trace.latency_ms;
    return j;
}

PipelineTrace trace_from_json(const json& j) {
    PipelineTrace trace;
    trace.query_id = j.at("query_id").get<std::string>();
    trace.original_query = j.at("original_query").get<std::string>();
    if (!j.at("rewritten_query").is_null()) {
        trace.rewritten_query = j.at("rewritten_query").get<std::string>();
    }
    trace.rewrite_triggered = j.at("rewrite_triggered").get<bool>();
    trace.rewrite_fallback = j.at("rewrite_fallback").get<bool>();
    trace.trigger_overlap_s = j.at("trigger_overlap_s").get<double>();
    trace.trigger_evidence_e = j.at("trigger_evidence_e").get<double>();
    trace.candidates_initial = passages_from_json(j.at("candidates_initial"));
    trace.candidates_rewritten = passages_from_json(j.at("candidates_rewritten"));
    trace.evidence = evidence_from_json(j.at("evidence"));
    trace.demo_ids = j.at("demo_ids").get<std::vector<std::string>>();
    trace.demos_short = j.at("demos_short").get<bool>();
    const json& g = j.at("generation");
    trace.generation.raw = g.at("raw").get<std::string>();
    trace.generation.rationale = g.at("rationale").get<std::string>();
    trace.generation.answer = answer_label_from_string(g.at("answer").get<std::string>());
    trace.generation.parse_ok = g.at("parse_ok").get<bool>();
    trace.generation.letter_word_conflict = g.at("letter_word_conflict").get<bool>();
    trace.generation.empty_rationale = g.at("empty_rationale").get<bool>();
    if (!j.at("verification").is_null()) {
        trace.verification = verification_from_json(j.at("verification"));
    }
    if (!j.at("faithfulness").is_null()) trace.faithfulness = j.at("faithfulness").get<double>();
    trace.error = j.at("error").get<bool>();
    trace.error_detail = j.at("error_detail").get<std::string>();
    for (const auto& r : j.at("requests")) {
        trace.requests.push_back(
            {r.at("kind").get<std::string>(), r.at("fingerprint").get<std::string>()});
    }
    if (j.contains("latency_ms")) trace.latency_ms = j.at("latency_ms").get<double>();
    return trace;
}

void save_traces_jsonl(const std::string& path, const std::vector<PipelineTrace>& traces) {
    std::vector<json> records;
    records.reserve(traces.size());
    for (const auto& t : traces) records.push_back(trace_to_json(t));
    write_jsonl(path, records);
}

std::vector<PipelineTrace> load_traces_jsonl(const std::string& path) {
    std::vector<PipelineTrace> traces;
    for_each_jsonl(path, [&](const json& j, std::size_t) { traces.push_back(trace_from_json(j)); });
    return traces;
}

// ---------------------------------------------------------------------------
// Full flow
// ---------------------------------------------------------------------------

namespace {

/// Evidence for one retrieval pass. With reranking disabled the BM25 top-m
/// stand in, every rerank score pinned to 1.0 so the e-trigger is vacuous.
EvidenceSet make_evidence(clients::RerankClient& reranker, const std::string& retrieval_query,
                          const std::vector<index::ScoredPassage>& candidates,
                          const PipelineConfig& cfg) {
    EvidenceSet evidence;
    if (candidates.empty()) {
        evidence.short_set = true;
        return evidence;  // s = e = 0: the rewrite branch fires
    }
    if (cfg.rerank) {
        evidence = rerank(reranker, retrieval_query, candidates, cfg.m);
    } else {
        evidence.short_set = candidates.size() < cfg.m;
        evidence.passages.assign(candidates.begin(),
                                 candidates.begin() +
                                     static_cast<std::ptrdiff_t>(std::min(cfg.m, candidates.size())));
        for (auto& p : evidence.passages) p.rerank_score = 1.0;
        evidence.evidence_e = 1.0;
    }
    evidence.overlap_s = overlap(retrieval_query, evidence);
    evidence.degenerate_overlap =
        index::normalize_and_tokenize(retrieval_query, true).empty();
    return evidence;
}

}  // namespace

PipelineTrace answer_query(const std::string& query, const index::Bm25Index& corpus,
                           const PipelineClients& model_clients, const demos::DemoPool* pool,
                           const PipelineConfig& cfg,
                           const std::set<std::string>& excluded_external_ids) {
    cfg.validate();
    if (cfg.shots > 0 && pool == nullptr) {
        throw std::invalid_argument("answer_query: a demonstration pool is required when shots > 0");
    }

    PipelineTrace trace;
    trace.original_query = query;
    const auto started = std::chrono::steady_clock::now();

    clients::RecordingChatClient generator(model_clients.generator, trace.requests);
    clients::RecordingChatClient rewriter(model_clients.rewriter, trace.requests);
    clients::RecordingChatClient judge(model_clients.judge, trace.requests);
    clients::RecordingEmbedClient embedder(model_clients.embedder, trace.requests, "embedder");
    clients::RecordingRerankClient reranker(model_clients.reranker, trace.requests);

    try {
        trace.candidates_initial = corpus.retrieve(query, cfg.k);
        EvidenceSet evidence = make_evidence(reranker, query, trace.candidates_initial, cfg);
        trace.trigger_overlap_s = evidence.overlap_s;
        trace.trigger_evidence_e = evidence.evidence_e;

        if (should_rewrite(evidence.overlap_s, evidence.evidence_e, cfg)) {
            trace.rewrite_triggered = true;
            const RewriteResult rewritten = rewrite_query(rewriter, query);
            if (rewritten.fallback) {
                trace.rewrite_fallback = true;
                trace.rewritten_query = query;  // degraded: original query kept
            } else {
                trace.rewritten_query = rewritten.query;
                trace.candidates_rewritten = corpus.retrieve(rewritten.query, cfg.k);
                evidence = make_evidence(reranker, rewritten.query, trace.candidates_rewritten, cfg);
            }
            // Algorithm: no second guard; s and e are not re-checked.
        }
        trace.evidence = evidence;

        std::vector<demos::Demonstration> selected;
        if (cfg.shots > 0) {
            const auto query_embedding = embedder.embed({query}).front();
            auto selection =
                demos::select_demos(*pool, query_embedding, cfg.shots, cfg.selection_policy,
                                    excluded_external_ids, mix_seed(cfg.seed, query),
                                    cfg.dedup_threshold, cfg.diversity_threshold);
            selected = std::move(selection.demos);
            trace.demos_short = selection.short_set;
            for (const auto& d : selected) trace.demo_ids.push_back(d.id);
        }

        if (evidence.passages.empty()) {
            // Nothing retrievable even after the rewrite: abstain, unparsed.
            trace.generation = rationale::GenerationOutcome{};
        } else {
            const auto prompt = rationale::build_prompt(query, evidence, selected, cfg.dataset_kind);
            const std::string raw = generator.generate(prompt.to_request(cfg.generator_model));
            trace.generation = rationale::parse_generation(raw, cfg.dataset_kind);

            const auto statements = verification::segment(trace.generation.rationale);
            if (!statements.empty()) {
                const std::size_t context_j =
                    cfg.context_j == 0 ? evidence.passages.size()
                                       : std::min(cfg.context_j, evidence.passages.size());
                verification::RationaleVerdict verdict;
                verdict.verdicts =
                    verification::verify_statements(judge, query, evidence, context_j, statements);
                verdict.faithfulness = verification::faithfulness(verdict.verdicts);
                verdict.overall_correct = verification::overall_verdict(verdict.verdicts);
                verdict.context_j = context_j;
                trace.faithfulness = verdict.faithfulness;
                trace.verification = std::move(verdict);
            }
        }
    } catch (const ClientError& e) {
        trace.error = true;
        trace.error_detail = to_string(e.kind()) + ": " + e.detail();
        trace.generation = rationale::GenerationOutcome{};  // no partial answer
        trace.verification.reset();
        trace.faithfulness.reset();
    }

    if (cfg.record_latency) {
        trace.latency_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - started)
                               .count();
    }
    return trace;
}

}  // namespace verirag::pipeline
