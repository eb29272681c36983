#include "verirag/demonstrations.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include "verirag/jsonl.hpp"
#include "verirag/rationale.hpp"
#include "verirag/retrieval_pipeline.hpp"

namespace verirag::demos {

using nlohmann::json;

BuildPoolResult build_pool(const std::vector<TrainExample>& train_records,
                           const index::Bm25Index& corpus, clients::ChatClient& generator,
                           clients::EmbedClient& embedder, clients::RerankClient& reranker,
                           const PoolBuildConfig& cfg) {
    if (cfg.m < 1 || cfg.m > cfg.k) throw std::invalid_argument("build_pool: require 1 <= m <= k");

    BuildPoolResult result;
    result.pool.build_seed = cfg.seed;
    for (const auto& record : train_records) {
        const auto candidates = corpus.retrieve(record.question, cfg.k);
        if (candidates.empty()) {
            result.skipped.push_back({record.id, "no passages retrieved"});
            continue;
        }

        Demonstration demo;
        demo.id = record.id;
        demo.question = record.question;
        demo.label = record.gold;
        demo.external_ids = record.external_ids;
        try {
            const EvidenceSet evidence =
                pipeline::rerank(reranker, record.question, candidates, cfg.m);
            const auto prompt =
                rationale::build_prompt(record.question, evidence, {}, cfg.dataset_kind);
            const std::string raw = generator.generate(prompt.to_request(generator.model()));
            demo.rationale = rationale::extract_rationale(raw);
            demo.evidence = evidence.passages;
            demo.embedding = embedder.embed({record.question}).front();
        } catch (const ClientError& e) {
            result.skipped.push_back({record.id, "client error: " + e.detail()});
            continue;
        }
        if (trim(demo.rationale).empty()) {
            result.skipped.push_back({record.id, "empty rationale"});
            continue;
        }
        if (demo.embedding.norm() == 0.0) {
            result.skipped.push_back({record.id, "zero embedding"});
            continue;
        }
        demo.embedding.normalize();
        for (const auto& passage : demo.evidence) {
            const index::Document* doc = corpus.find(passage.doc_id);
            if (doc && doc->external_id) demo.external_ids.insert(*doc->external_id);
        }

        if (result.pool.demonstrations.empty()) {
            result.pool.embed_dim = demo.embedding.dimension();
        } else if (demo.embedding.dimension() != result.pool.embed_dim) {
            throw DataError("inconsistent embedding dimension for record " + record.id);
        }
        result.pool.demonstrations.push_back(std::move(demo));
    }
    return result;
}

DemoPool deduplicate(const DemoPool& pool, double threshold) {
    if (threshold <= 0.0 || threshold > 1.0) {
        throw std::invalid_argument("deduplicate: threshold must be in (0,1]");
    }
    DemoPool out;
    out.embed_dim = pool.embed_dim;
    out.source_split = pool.source_split;
    out.build_seed = pool.build_seed;
    for (const auto& demo : pool.demonstrations) {
        const bool duplicate =
            std::any_of(out.demonstrations.begin(), out.demonstrations.end(), [&](const auto& kept) {
                return demo.embedding.cosine(kept.embedding) >= threshold;
            });
        if (!duplicate) out.demonstrations.push_back(demo);
    }
    return out;
}

namespace {

bool shares_external_id(const Demonstration& demo, const std::set<std::string>& excluded) {
    // Both sets are ordered; a linear merge pass suffices.
    auto a = demo.external_ids.begin();
    auto b = excluded.begin();
    while (a != demo.external_ids.end() && b != excluded.end()) {
        if (*a == *b) return true;
        if (*a < *b) {
            ++a;
        } else {
            ++b;
        }
    }
    return false;
}

}  // namespace

SelectionResult select_demos(const DemoPool& pool, const clients::EmbeddingVector& query_embedding,
                             std::size_t k_shots, SelectionPolicy policy,
                             const std::set<std::string>& excluded_external_ids,
                             std::uint64_t seed, double dedup_threshold,
                             double diversity_threshold) {
    SelectionResult result;
    if (k_shots == 0) return result;

    // Eligibility: decontaminated and not a near-duplicate of the query.
    struct Candidate {
        std::size_t pool_index;
        double similarity;
    };
    std::vector<Candidate> eligible;
    for (std::size_t i = 0; i < pool.demonstrations.size(); ++i) {
        const auto& demo = pool.demonstrations[i];
        if (shares_external_id(demo, excluded_external_ids)) continue;
        const double sim = demo.embedding.cosine(query_embedding);
        if (sim >= dedup_threshold) continue;
        eligible.push_back({i, sim});
    }
    std::stable_sort(eligible.begin(), eligible.end(),
                     [](const Candidate& a, const Candidate& b) {
                         return a.similarity > b.similarity;
                     });

    std::vector<std::size_t> picked;  // indices into `eligible`
    std::vector<bool> taken(eligible.size(), false);
    const auto take = [&](std::size_t e) {
        picked.push_back(e);
        taken[e] = true;
    };

    switch (policy) {
        case SelectionPolicy::similarity_only: {
            for (std::size_t e = 0; e < eligible.size() && picked.size() < k_shots; ++e) {
                const auto& cand = pool.demonstrations[eligible[e].pool_index];
                const bool redundant = std::any_of(picked.begin(), picked.end(), [&](std::size_t p) {
                    const auto& kept = pool.demonstrations[eligible[p].pool_index];
                    return cand.embedding.cosine(kept.embedding) > diversity_threshold;
                });
                if (!redundant) take(e);
            }
            break;
        }
        case SelectionPolicy::label_balanced: {
            // Round-robin across the pool's label classes, classes ordered
            // by their best eligible similarity, similarity-descending
            // within each class. A slot whose class has run dry (or lost
            // every member to the filters) falls back to the most similar
            // remaining demonstration of any class, with the fallback
            // flagged. Classes absent from the pool itself hold no slot.
            std::vector<std::vector<std::size_t>> groups(4);
            for (std::size_t e = 0; e < eligible.size(); ++e) {
                groups[static_cast<std::size_t>(
                           pool.demonstrations[eligible[e].pool_index].label)]
                    .push_back(e);
            }
            std::set<std::size_t> pool_classes;
            for (const auto& d : pool.demonstrations) {
                pool_classes.insert(static_cast<std::size_t>(d.label));
            }
            std::vector<std::size_t> class_order(pool_classes.begin(), pool_classes.end());
            std::stable_sort(class_order.begin(), class_order.end(),
                             [&](std::size_t a, std::size_t b) {
                                 const double sa =
                                     groups[a].empty() ? -1.0 : eligible[groups[a][0]].similarity;
                                 const double sb =
                                     groups[b].empty() ? -1.0 : eligible[groups[b][0]].similarity;
                                 return sa > sb;  // ties keep enum order
                             });

            std::vector<std::size_t> cursor(groups.size(), 0);
            std::size_t next_global = 0;  // similarity-order fallback cursor
            const auto take_most_similar_remaining = [&] {
                while (next_global < eligible.size() && taken[next_global]) ++next_global;
                if (next_global == eligible.size()) return false;
                take(next_global);
                return true;
            };
            bool progressed = true;
            while (picked.size() < k_shots && progressed) {
                progressed = false;
                for (std::size_t g : class_order) {
                    if (picked.size() >= k_shots) break;
                    while (cursor[g] < groups[g].size() && taken[groups[g][cursor[g]]]) ++cursor[g];
                    if (cursor[g] < groups[g].size()) {
                        take(groups[g][cursor[g]++]);
                        progressed = true;
                    } else if (take_most_similar_remaining()) {
                        result.balance_fallback = true;
                        progressed = true;
                    }
                }
            }
            break;
        }
        case SelectionPolicy::static_pool: {
            // Query-independent: the first eligible demonstrations in pool
            // order, ignoring similarity.
            std::vector<std::size_t> by_pool_order(eligible.size());
            for (std::size_t e = 0; e < eligible.size(); ++e) by_pool_order[e] = e;
            std::stable_sort(by_pool_order.begin(), by_pool_order.end(),
                             [&](std::size_t a, std::size_t b) {
                                 return eligible[a].pool_index < eligible[b].pool_index;
                             });
            for (std::size_t e : by_pool_order) {
                if (picked.size() >= k_shots) break;
                take(e);
            }
            break;
        }
    }

    // Shortfall: seeded uniform fill from whatever remains eligible.
    if (picked.size() < k_shots) {
        std::vector<std::size_t> remaining;
        for (std::size_t e = 0; e < eligible.size(); ++e) {
            if (!taken[e]) remaining.push_back(e);
        }
        std::mt19937_64 rng(seed);
        while (picked.size() < k_shots && !remaining.empty()) {
            const auto at = static_cast<std::size_t>(bounded_uniform(rng, remaining.size()));
            take(remaining[at]);
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(at));
        }
    }
    result.short_set = picked.size() < k_shots;

    // Emit in similarity order regardless of how the policy picked.
    std::stable_sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
        return eligible[a].similarity > eligible[b].similarity;
    });
    result.demos.reserve(picked.size());
    for (std::size_t p : picked) result.demos.push_back(pool.demonstrations[eligible[p].pool_index]);
    return result;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

json demo_to_json(const Demonstration& demo) {
    json evidence = json::array();
    for (const auto& p : demo.evidence) {
        json e;
        e["doc_id"] = p.doc_id;
        e["text"] = p.text;
        e["bm25_score"] = p.bm25_score;
        e["rerank_score"] = p.rerank_score ? json(*p.rerank_score) : json(nullptr);
        evidence.push_back(std::move(e));
    }
    json j;
    j["id"] = demo.id;
    j["question"] = demo.question;
    j["rationale"] = demo.rationale;
    j["label"] = to_string(demo.label);
    j["evidence"] = std::move(evidence);
    j["embedding"] = demo.embedding.values;
    j["external_ids"] = demo.external_ids;  // std::set serializes sorted
    return j;
}

Demonstration demo_from_json(const json& j) {
    Demonstration demo;
    demo.id = j.at("id").get<std::string>();
    demo.question = j.at("question").get<std::string>();
    demo.rationale = j.at("rationale").get<std::string>();
    demo.label = answer_label_from_string(j.at("label").get<std::string>());
    for (const auto& e : j.at("evidence")) {
        index::ScoredPassage p;
        p.doc_id = e.at("doc_id").get<std::string>();
        p.text = e.at("text").get<std::string>();
        p.bm25_score = e.at("bm25_score").get<double>();
        if (!e.at("rerank_score").is_null()) p.rerank_score = e.at("rerank_score").get<double>();
        demo.evidence.push_back(std::move(p));
    }
    demo.embedding.values = j.at("embedding").get<std::vector<double>>();
    demo.external_ids = j.at("external_ids").get<std::set<std::string>>();
    return demo;
}

}  // namespace

void save_pool(const BuildPoolResult& result, const std::string& pool_path,
               const std::string& meta_path, double dedup_threshold) {
    std::vector<json> records;
    records.reserve(result.pool.demonstrations.size());
    std::uint64_t content_hash = fnv1a64("demo-pool-v1");
    for (const auto& demo : result.pool.demonstrations) {
        json j = demo_to_json(demo);
        content_hash = fnv1a64(j.dump(), content_hash);
        records.push_back(std::move(j));
    }
    write_jsonl(pool_path, records);

    json skipped = json::array();
    for (const auto& s : result.skipped) {
        skipped.push_back({{"id", s.id}, {"reason", s.reason}});
    }
    json meta;
    meta["embed_dim"] = result.pool.embed_dim;
    meta["source_split"] = result.pool.source_split;
    meta["build_seed"] = result.pool.build_seed;
    meta["dedup_threshold"] = dedup_threshold;
    meta["demo_count"] = result.pool.demonstrations.size();
    meta["pool_fingerprint"] = to_hex(content_hash);
    meta["skipped"] = std::move(skipped);
    write_text_file(meta_path, meta.dump(2) + "\n");
}

DemoPool load_pool(const std::string& pool_path, const std::string& meta_path) {
    const json meta = json::parse(read_text_file(meta_path));
    DemoPool pool;
    pool.embed_dim = meta.at("embed_dim").get<std::size_t>();
    pool.source_split = meta.at("source_split").get<std::string>();
    pool.build_seed = meta.at("build_seed").get<std::uint64_t>();

    std::uint64_t content_hash = fnv1a64("demo-pool-v1");
    for_each_jsonl(pool_path, [&](const json& j, std::size_t line) {
        Demonstration demo = demo_from_json(j);
        if (pool.embed_dim != 0 && demo.embedding.dimension() != pool.embed_dim) {
            throw DataError(pool_path, line, "embedding dimension mismatch");
        }
        content_hash = fnv1a64(j.dump(), content_hash);
        pool.demonstrations.push_back(std::move(demo));
    });
    if (meta.contains("pool_fingerprint") &&
        meta.at("pool_fingerprint").get<std::string>() != to_hex(content_hash)) {
        throw DataError(pool_path, 0, "pool content does not match its metadata fingerprint");
    }
    if (meta.contains("demo_count") &&
        meta.at("demo_count").get<std::size_t>() != pool.demonstrations.size()) {
        throw DataError(pool_path, 0, "pool size does not match its metadata");
    }
    return pool;
}

}  // namespace verirag::demos
