#pragma once

/// \file evidence.hpp
/// The evidence set E: top-m reranked passages plus the retrieval-quality
/// statistics s (lexical overlap) and e (mean rerank score) computed for it.

#include <vector>

#include "verirag/corpus_index.hpp"

namespace verirag {

struct EvidenceSet {
    /// Sorted by rerank_score descending; every passage carries one.
    std::vector<index::ScoredPassage> passages;
    double overlap_s = 0.0;
    double evidence_e = 0.0;
    /// Fewer candidates than m were available.
    bool short_set = false;
    /// The query had no non-stopword tokens, so overlap_s is pinned to 0.
    bool degenerate_overlap = false;
};

}  // namespace verirag
