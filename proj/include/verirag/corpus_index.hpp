#pragma once

/// \file corpus_index.hpp
/// Tokenization, abstract corpus handling and Okapi BM25 retrieval.
///
/// The index is immutable after build; concurrent readers are safe.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "verirag/common.hpp"

namespace verirag::index {

using StopwordSet = std::unordered_set<std::string>;

/// Embedded English stopword list (175 function words, list version 1).
/// Used only by the lexical-overlap statistic; BM25 keeps stopwords.
const StopwordSet& english_stopwords();

/// Lowercases, folds Latin diacritics to ASCII and splits on runs of
/// non-alphanumeric characters. Stopwords are removed iff `drop_stopwords`.
/// Token order is preserved; empty input yields an empty sequence.
std::vector<std::string> normalize_and_tokenize(std::string_view text,
                                                const StopwordSet& stopwords,
                                                bool drop_stopwords);

/// Convenience overload against the embedded stopword list.
std::vector<std::string> normalize_and_tokenize(std::string_view text, bool drop_stopwords = false);

// ---------------------------------------------------------------------------
// Corpus types
// ---------------------------------------------------------------------------

struct Document {
    std::string doc_id;
    std::optional<std::string> external_id;  // e.g. PubMed identifier
    std::string title;
    std::string body;
};

/// Indexed text is title concatenated with body, single space separator.
std::string document_text(const Document& doc);

struct IndexStats {
    std::size_t doc_count = 0;
    double avg_doc_len = 0.0;                          // mean token count
    std::map<std::string, std::size_t> doc_freq;       // term -> document frequency
    std::map<std::string, std::size_t> doc_len;        // doc_id -> token count
};

struct ScoredPassage {
    std::string doc_id;
    std::string text;  // title + body
    double bm25_score = 0.0;
    std::optional<double> rerank_score;  // in [0,1] when present
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// ---------------------------------------------------------------------------
// Index
// ---------------------------------------------------------------------------

/// Okapi BM25 over an in-memory inverted index with the non-negative IDF
/// ln(1 + (N - df + 0.5) / (df + 0.5)). Ties on equal scores break by
/// doc_id ascending so retrieval is deterministic.
class Bm25Index {
public:
    Bm25Index() = default;

    /// Builds the inverted index. Throws DataError on duplicate doc_ids.
    static Bm25Index build(std::vector<Document> docs, Bm25Params params = {});

    /// Top-k retrieval, sorted by score descending then doc_id ascending.
    /// Stopwords are retained in the query. Throws std::invalid_argument
    /// when k == 0; a query with no indexed terms returns an empty result.
    std::vector<ScoredPassage> retrieve(const std::string& query, std::size_t k) const;

    const IndexStats& stats() const noexcept { return stats_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<Document>& documents() const noexcept { return docs_; }

    /// Lookup by doc_id; nullptr when absent.
    const Document* find(const std::string& doc_id) const;

    /// Persists the corpus and parameters to a single versioned file; the
    /// index structure is rebuilt deterministically on load.
    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

private:
    struct Posting {
        std::size_t doc_ordinal;
        std::size_t term_freq;
    };

    std::vector<Document> docs_;
    std::vector<std::size_t> doc_tokens_;  // token count per ordinal
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::unordered_map<std::string, std::size_t> ordinal_by_id_;
    IndexStats stats_;
    Bm25Params params_;
};

/// Reads a corpus from JSONL: one document per line with fields `doc_id`,
/// `external_id` (nullable), `title`, `body`. Rejects documents whose body
/// normalizes to no tokens, with the offending line number.
std::vector<Document> load_corpus_jsonl(const std::string& path);

void save_corpus_jsonl(const std::string& path, const std::vector<Document>& docs);

}  // namespace verirag::index
