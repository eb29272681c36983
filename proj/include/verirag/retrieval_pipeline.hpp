#pragma once

/// \file retrieval_pipeline.hpp
/// Orchestration of the full per-query flow: retrieve -> rerank ->
/// (conditional single rewrite -> re-retrieve -> re-rerank) -> reason ->
/// verify, with a complete audit trace.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "verirag/common.hpp"
#include "verirag/corpus_index.hpp"
#include "verirag/demonstrations.hpp"
#include "verirag/evidence.hpp"
#include "verirag/model_clients.hpp"
#include "verirag/rationale.hpp"
#include "verirag/verification.hpp"

namespace verirag::pipeline {

struct PipelineConfig {
    std::size_t k = 20;      // BM25 candidates
    std::size_t m = 5;       // evidence passages after reranking
    double tau_ovlp = 0.3;   // rewrite trigger: lexical overlap threshold
    double tau_evid = 0.5;   // rewrite trigger: evidence score threshold
    std::size_t shots = 0;   // demonstrations per query, 0..4
    SelectionPolicy selection_policy = SelectionPolicy::similarity_only;
    std::uint64_t seed = 0;
    DatasetKind dataset_kind = DatasetKind::bioasq;

    /// Ablation switch: with reranking off, evidence is the BM25 top-m and
    /// the evidence score is pinned to 1.0 (the e-trigger is vacuous).
    bool rerank = true;
    /// Passages shown to the judge; 0 means all of E.
    std::size_t context_j = 0;
    double dedup_threshold = 0.98;
    double diversity_threshold = 0.95;
    std::string generator_model = "synthetic";
    /// Record wall-clock latency per query. Off by default so that traces
    /// and reports are byte-identical across runs.
    bool record_latency = false;

    /// Throws std::invalid_argument when 1 <= m <= k, thresholds in [0,1]
    /// or shots in 0..4 are violated.
    void validate() const;
};

/// Borrowed client bundle; all clients are shared and not owned.
struct PipelineClients {
    clients::ChatClient& generator;
    clients::ChatClient& rewriter;
    clients::ChatClient& judge;
    clients::EmbedClient& embedder;
    clients::RerankClient& reranker;
};

// ---------------------------------------------------------------------------
// Stage operations
// ---------------------------------------------------------------------------

/// Scores all candidates with the rerank client and keeps the top-m by
/// rerank score descending (ties by bm25_score descending, then doc_id).
/// Fewer than m candidates → all returned, short_set flagged. The returned
/// set carries evidence_e; overlap_s is left for the caller.
EvidenceSet rerank(clients::RerankClient& client, const std::string& query,
                   const std::vector<index::ScoredPassage>& candidates, std::size_t m);

/// Fraction of distinct non-stopword query tokens present in the
/// concatenated evidence passages. A query with no non-stopword tokens
/// scores 0 (degenerate; forces the rewrite branch).
double overlap(const std::string& query, const EvidenceSet& evidence,
               const index::StopwordSet& stopwords);
double overlap(const std::string& query, const EvidenceSet& evidence);

/// Arithmetic mean of rerank scores; throws std::invalid_argument on an
/// empty set (an error, distinct from a score of 0).
double evidence_score(const EvidenceSet& evidence);

/// Rewrite trigger: s < tau_ovlp OR e < tau_evid, strict inequalities.
bool should_rewrite(double s, double e, const PipelineConfig& cfg);

struct RewriteResult {
    std::string query;     // rewritten, or the original on fallback
    bool fallback = false; // rewrite client failed; original query kept
};

/// Invokes the rewriter with the fixed template. Client errors degrade to
/// the original query with the fallback flag set.
RewriteResult rewrite_query(clients::ChatClient& client, const std::string& query);

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

struct PipelineTrace {
    std::string query_id;  // set by the harness; empty for ad-hoc calls
    std::string original_query;
    std::optional<std::string> rewritten_query;  // present iff rewrite_triggered
    bool rewrite_triggered = false;
    bool rewrite_fallback = false;
    double trigger_overlap_s = 0.0;   // s at decision time
    double trigger_evidence_e = 0.0;  // e at decision time
    std::vector<index::ScoredPassage> candidates_initial;
    std::vector<index::ScoredPassage> candidates_rewritten;  // empty unless re-retrieved
    EvidenceSet evidence;  // final E; carries its own s and e
    std::vector<std::string> demo_ids;
    bool demos_short = false;
    rationale::GenerationOutcome generation;
    std::optional<verification::RationaleVerdict> verification;
    std::optional<double> faithfulness;
    bool error = false;
    std::string error_detail;
    clients::RequestLog requests;  // every model request issued, in order
    std::optional<double> latency_ms;
};

nlohmann::json trace_to_json(const PipelineTrace& trace);
PipelineTrace trace_from_json(const nlohmann::json& j);

void save_traces_jsonl(const std::string& path, const std::vector<PipelineTrace>& traces);
std::vector<PipelineTrace> load_traces_jsonl(const std::string& path);

// ---------------------------------------------------------------------------
// Full per-query flow
// ---------------------------------------------------------------------------

/// Executes the complete flow for one query. `pool` may be null when
/// cfg.shots == 0. `excluded_external_ids` carries the evaluation record's
/// document identifiers for demonstration decontamination. Unrecoverable
/// client errors yield a trace with the error state set and no answer.
PipelineTrace answer_query(const std::string& query, const index::Bm25Index& corpus,
                           const PipelineClients& model_clients, const demos::DemoPool* pool,
                           const PipelineConfig& cfg,
                           const std::set<std::string>& excluded_external_ids = {});

}  // namespace verirag::pipeline
