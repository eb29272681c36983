#pragma once

/// \file harness.hpp
/// Batch evaluation: dataset loading, run configuration, the eval loop over
/// answer_query, ablation sweeps, and report serialization.

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "verirag/corpus_index.hpp"
#include "verirag/demonstrations.hpp"
#include "verirag/metrics.hpp"
#include "verirag/model_clients.hpp"
#include "verirag/retrieval_pipeline.hpp"

namespace verirag::harness {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

enum class Split { train, dev, test };

std::string to_string(Split split);
Split split_from_string(const std::string& s);

struct DatasetRecord {
    std::string id;
    std::string question;
    AnswerLabel gold = AnswerLabel::yes;
    std::set<std::string> external_ids;  // source documents, for decontamination
    Split split = Split::test;
};

/// Reads JSONL of {id, question, gold, external_ids[], split}. Gold labels
/// must lie in the dataset's label space (no "maybe" for bioasq). Extra
/// fields — gold passages in particular — are ignored: retrieval is
/// question-only. Malformed lines and duplicate ids raise DataError with the
/// line number.
std::vector<DatasetRecord> load_dataset(const std::string& path, DatasetKind kind);

std::vector<DatasetRecord> filter_split(const std::vector<DatasetRecord>& records, Split split);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// How to construct one model client. `backend` is "synthetic" (seeded local
/// mock), "scripted" (JSONL fingerprint->response script), or "http".
/// Credentials are never stored here: `http.api_key_env` names an
/// environment variable.
struct ClientSpec {
    std::string backend = "synthetic";
    std::string model = "synthetic";
    std::uint64_t seed = 0;        // synthetic backends
    std::size_t dim = 64;          // synthetic embedder only
    std::string script_path;       // scripted backends
    clients::HttpClientConfig http;
};

struct ClientsConfig {
    ClientSpec generator;
    ClientSpec rewriter;
    ClientSpec judge;
    ClientSpec embedder;
    ClientSpec reranker;
};

struct RunConfig {
    pipeline::PipelineConfig pipeline;
    ClientsConfig clients;
    /// Worker threads for the batch loop. 1 (the default) preserves exact
    /// sequential behaviour; any value yields identical reports because
    /// results are reduced in dataset order.
    std::size_t parallelism = 1;

    void validate() const;
};

/// Canonical JSON form with every field materialized; the fingerprint is the
/// hash of this rendering, so any field change changes the fingerprint.
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Strict parse: unknown keys raise DataError naming the key.
RunConfig load_run_config(const std::string& path);

std::string config_fingerprint(const RunConfig& cfg);

/// Owning bundle built from a ClientsConfig; refs() borrows it for the
/// pipeline. Synthetic backends need no network or keys.
struct ClientSet {
    std::unique_ptr<clients::ChatClient> generator;
    std::unique_ptr<clients::ChatClient> rewriter;
    std::unique_ptr<clients::ChatClient> judge;
    std::unique_ptr<clients::EmbedClient> embedder;
    std::unique_ptr<clients::RerankClient> reranker;

    pipeline::PipelineClients refs() const;
};

ClientSet make_clients(const ClientsConfig& cfg);

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

struct RunReport {
    std::string config_fingerprint;
    std::vector<pipeline::PipelineTrace> traces;   // one per record, in order
    std::vector<AnswerLabel> golds;                // aligned with traces
    double accuracy = 0.0;
    double abstention_rate = 0.0;
    double rewrite_trigger_rate = 0.0;
    std::optional<double> mean_faithfulness;  // over traces that were verified
    std::size_t error_count = 0;
};

/// Runs every record through answer_query with the record's external_ids
/// excluded from demonstration selection. Per-record client failures land in
/// the trace error state and never abort the batch. Throws
/// std::invalid_argument on an empty dataset.
RunReport run_eval(const std::vector<DatasetRecord>& dataset, const index::Bm25Index& corpus,
                   const pipeline::PipelineClients& model_clients, const demos::DemoPool* pool,
                   const RunConfig& cfg);

/// Recomputes the aggregate block from traces + golds; run_eval's output
/// satisfies aggregates == recompute(traces, golds) by construction.
RunReport recompute_aggregates(std::vector<pipeline::PipelineTrace> traces,
                               std::vector<AnswerLabel> golds, std::string config_fingerprint);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// Human-readable summary table (fixed layout, stable across runs).
std::string render_report(const RunReport& report);

/// Re-verifies every non-error trace's rationale against its own evidence
/// with the given judge, under a new context size. Faithfulness and
/// verdicts are replaced; generation and retrieval stay untouched.
void reverify_traces(std::vector<pipeline::PipelineTrace>& traces, clients::ChatClient& judge,
                     std::size_t context_j);

// ---------------------------------------------------------------------------
// Ablation sweeps
// ---------------------------------------------------------------------------

struct AblationRow {
    bool rerank = true;
    SelectionPolicy policy = SelectionPolicy::similarity_only;
    std::size_t shots = 0;
    double accuracy = 0.0;
    std::optional<double> mean_faithfulness;
    std::string config_fingerprint;
};

struct AblationTable {
    std::vector<AblationRow> rows;  // full grid, fixed order
    /// Paired differences: accuracy gained by reranking at fixed
    /// (policy, shots), and by dynamic over static selection at fixed
    /// (rerank, shots).
    nlohmann::json deltas;
};

/// Full 2x2x5 grid: {rerank on/off} x {static, dynamic(similarity)} x
/// {shots 0..4}, each evaluated with run_eval under the base config.
AblationTable run_ablation(const std::vector<DatasetRecord>& dataset,
                           const index::Bm25Index& corpus,
                           const pipeline::PipelineClients& model_clients,
                           const demos::DemoPool* pool, const RunConfig& base_cfg);

nlohmann::json ablation_to_json(const AblationTable& table);
std::string render_ablation(const AblationTable& table);

}  // namespace verirag::harness
