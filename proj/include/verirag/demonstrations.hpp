#pragma once

/// \file demonstrations.hpp
/// The offline demonstration pool T*: built from the training split,
/// decontaminated, and queried per evaluation question for in-context
/// demonstrations.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "verirag/common.hpp"
#include "verirag/corpus_index.hpp"
#include "verirag/evidence.hpp"
#include "verirag/model_clients.hpp"

namespace verirag::demos {

/// One stored tuple (q_i, r_i, y_i, E_i) plus the query embedding and the
/// document identifiers used for decontamination.
struct Demonstration {
    std::string id;  // originating training record id
    std::string question;
    std::string rationale;  // model-generated, final-answer line stripped
    AnswerLabel label = AnswerLabel::yes;  // gold label of the training record
    std::vector<index::ScoredPassage> evidence;
    clients::EmbeddingVector embedding;  // unit-normalized
    std::set<std::string> external_ids;  // record ids plus evidence PubMed ids
};

struct DemoPool {
    std::vector<Demonstration> demonstrations;
    std::size_t embed_dim = 0;
    std::string source_split = "train";
    std::uint64_t build_seed = 0;
};

struct PoolBuildConfig {
    std::size_t k = 20;  // BM25 candidates per training question
    std::size_t m = 5;   // evidence passages kept after reranking
    DatasetKind dataset_kind = DatasetKind::bioasq;
    std::uint64_t seed = 0;
};

/// A training record as consumed by the pool builder. Mirrors the dataset
/// schema; defined here so the pool does not depend on the harness.
struct TrainExample {
    std::string id;
    std::string question;
    AnswerLabel gold = AnswerLabel::yes;
    std::set<std::string> external_ids;
};

struct SkipEntry {
    std::string id;
    std::string reason;
};

struct BuildPoolResult {
    DemoPool pool;
    std::vector<SkipEntry> skipped;
};

/// Runs retrieval + rerank over the shared index for every training
/// example and generates an evidence-linked rationale with the evaluation
/// prompt format (zero demonstrations). Failed generations are skipped and
/// logged; the build never aborts wholesale.
BuildPoolResult build_pool(const std::vector<TrainExample>& train_records,
                           const index::Bm25Index& corpus, clients::ChatClient& generator,
                           clients::EmbedClient& embedder, clients::RerankClient& reranker,
                           const PoolBuildConfig& cfg);

/// Greedy pass in pool order: a demonstration is dropped when its cosine
/// similarity to any retained demonstration is >= threshold.
DemoPool deduplicate(const DemoPool& pool, double threshold);

struct SelectionResult {
    std::vector<Demonstration> demos;  // similarity descending
    bool short_set = false;            // eligible pool smaller than k_shots
    bool balance_fallback = false;     // a label class ran dry under label_balanced
};

/// Per-query demonstration selection with decontamination. Demonstrations
/// sharing an external id with the query, or near-duplicating the query
/// embedding (cosine >= dedup_threshold), are never selected. Shortfalls
/// against k_shots are filled by seeded uniform sampling from the
/// remaining eligible demonstrations.
SelectionResult select_demos(const DemoPool& pool,
                             const clients::EmbeddingVector& query_embedding,
                             std::size_t k_shots, SelectionPolicy policy,
                             const std::set<std::string>& excluded_external_ids,
                             std::uint64_t seed, double dedup_threshold = 0.98,
                             double diversity_threshold = 0.95);

/// Pool persistence: demonstrations as JSONL plus a sidecar metadata file
/// (embed_dim, seed, thresholds, source fingerprint, skip log).
void save_pool(const BuildPoolResult& result, const std::string& pool_path,
               const std::string& meta_path, double dedup_threshold);
DemoPool load_pool(const std::string& pool_path, const std::string& meta_path);

}  // namespace verirag::demos
