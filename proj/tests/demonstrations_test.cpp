#include "verirag/demonstrations.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "verirag/jsonl.hpp"

using namespace verirag;
using demos::Demonstration;
using demos::DemoPool;

namespace {

constexpr double kPi = 3.14159265358979323846;

clients::EmbeddingVector at_angle(double degrees) {
    const double rad = degrees * kPi / 180.0;
    return clients::EmbeddingVector{{std::cos(rad), std::sin(rad)}};
}

Demonstration make_demo(std::string id, AnswerLabel label, double degrees,
                        std::set<std::string> external_ids = {}) {
    Demonstration demo;
    demo.id = std::move(id);
    demo.question = "q-" + demo.id;
    demo.rationale = "r-" + demo.id;
    demo.label = label;
    demo.embedding = at_angle(degrees);
    demo.external_ids = std::move(external_ids);
    return demo;
}

/// d1..d6 at 15..65 degrees, labels cycling yes/no/maybe.
DemoPool make_pool() {
    DemoPool pool;
    pool.embed_dim = 2;
    pool.demonstrations = {
        make_demo("d1", AnswerLabel::yes, 15.0),   make_demo("d2", AnswerLabel::no, 25.0),
        make_demo("d3", AnswerLabel::maybe, 35.0), make_demo("d4", AnswerLabel::yes, 45.0),
        make_demo("d5", AnswerLabel::no, 55.0),    make_demo("d6", AnswerLabel::maybe, 65.0),
    };
    return pool;
}

std::vector<std::string> ids_of(const std::vector<Demonstration>& demos_list) {
    std::vector<std::string> out;
    for (const auto& d : demos_list) out.push_back(d.id);
    return out;
}

}  // namespace

TEST_CASE("deduplicate drops later members of near-duplicate pairs") {
    DemoPool pool;
    pool.embed_dim = 2;

    SUBCASE("identical questions collapse") {
        pool.demonstrations = {make_demo("a", AnswerLabel::yes, 10.0),
                               make_demo("b", AnswerLabel::no, 10.0)};
        const auto out = demos::deduplicate(pool, 0.98);
        CHECK(ids_of(out.demonstrations) == std::vector<std::string>{"a"});
    }
    SUBCASE("all pairs below threshold survive") {
        // Adjacent pool members sit 10 degrees apart (cosine ~0.9848), so a
        // 0.99 threshold keeps everything while 0.98 would thin the pool.
        pool = make_pool();
        const auto out = demos::deduplicate(pool, 0.99);
        CHECK(out.demonstrations.size() == 6);
        CHECK(out.embed_dim == 2);
        CHECK(ids_of(demos::deduplicate(pool, 0.98).demonstrations) ==
              std::vector<std::string>{"d1", "d3", "d5"});
    }
    SUBCASE("greedy chain keeps the first of each duplicate run") {
        // A~B and B~C above threshold, A~C below: B is dropped against the
        // retained A, then C survives because only A remains.
        pool.demonstrations = {make_demo("A", AnswerLabel::yes, 0.0),
                               make_demo("B", AnswerLabel::no, 10.0),
                               make_demo("C", AnswerLabel::maybe, 20.0)};
        REQUIRE(pool.demonstrations[0].embedding.cosine(pool.demonstrations[1].embedding) >= 0.98);
        REQUIRE(pool.demonstrations[1].embedding.cosine(pool.demonstrations[2].embedding) >= 0.98);
        REQUIRE(pool.demonstrations[0].embedding.cosine(pool.demonstrations[2].embedding) < 0.98);
        const auto out = demos::deduplicate(pool, 0.98);
        CHECK(ids_of(out.demonstrations) == std::vector<std::string>{"A", "C"});
    }
    SUBCASE("threshold validation") {
        CHECK_THROWS_AS(demos::deduplicate(pool, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(demos::deduplicate(pool, 1.5), std::invalid_argument);
    }
}

TEST_CASE("select_demos: the most similar eligible demo comes first") {
    const auto pool = make_pool();
    // Query next to d1; threshold 1.0 keeps even cosine 0.9998 eligible.
    const auto result = demos::select_demos(pool, at_angle(16.0), 1,
                                            SelectionPolicy::similarity_only, {}, 0,
                                            /*dedup_threshold=*/1.0);
    CHECK(ids_of(result.demos) == std::vector<std::string>{"d1"});
    CHECK_FALSE(result.short_set);
}

TEST_CASE("select_demos: similarity_only applies the pairwise diversity cap") {
    const auto pool = make_pool();
    // Query at 0°: sims descend d1..d6. Neighbours 10° apart have cosine
    // 0.985 > 0.95 and are rejected; 20° apart (0.94) pass.
    const auto result =
        demos::select_demos(pool, at_angle(0.0), 3, SelectionPolicy::similarity_only, {}, 0);
    CHECK(ids_of(result.demos) == std::vector<std::string>{"d1", "d3", "d5"});
    CHECK_FALSE(result.short_set);
    CHECK_FALSE(result.balance_fallback);
}

TEST_CASE("select_demos: near-duplicates of the query are never selected") {
    const auto pool = make_pool();
    // d1 (cosine 1.0) and d2 (cosine ~0.985) both breach the 0.98 default.
    const auto result =
        demos::select_demos(pool, at_angle(15.0), 1, SelectionPolicy::similarity_only, {}, 0);
    CHECK(ids_of(result.demos) == std::vector<std::string>{"d3"});
}

TEST_CASE("select_demos: external-id decontamination beats similarity") {
    auto pool = make_pool();
    pool.demonstrations[3].external_ids = {"pmid-9", "pmid-10"};  // d4

    const auto result = demos::select_demos(pool, at_angle(90.0), 6,
                                            SelectionPolicy::similarity_only, {"pmid-9"}, 0);
    CHECK(result.demos.size() == 5);
    CHECK(result.short_set);  // only 5 eligible for k=6
    for (const auto& d : result.demos) CHECK(d.id != "d4");
}

TEST_CASE("select_demos: label_balanced takes one label per round") {
    const auto pool = make_pool();

    SUBCASE("k=3 covers all three labels") {
        const auto result =
            demos::select_demos(pool, at_angle(0.0), 3, SelectionPolicy::label_balanced, {}, 0);
        CHECK(ids_of(result.demos) == std::vector<std::string>{"d1", "d2", "d3"});
        CHECK_FALSE(result.balance_fallback);
    }
    SUBCASE("k=4 wraps to a second round") {
        const auto result =
            demos::select_demos(pool, at_angle(0.0), 4, SelectionPolicy::label_balanced, {}, 0);
        CHECK(ids_of(result.demos) == std::vector<std::string>{"d1", "d2", "d3", "d4"});
        CHECK_FALSE(result.balance_fallback);
    }
    SUBCASE("a dry class falls back to similarity order, flagged") {
        auto pool2 = make_pool();
        pool2.demonstrations[2].external_ids = {"decon"};  // d3 (maybe)
        pool2.demonstrations[5].external_ids = {"decon"};  // d6 (maybe)
        const auto result = demos::select_demos(pool2, at_angle(0.0), 3,
                                                SelectionPolicy::label_balanced, {"decon"}, 0);
        CHECK(ids_of(result.demos) == std::vector<std::string>{"d1", "d2", "d4"});
        CHECK(result.balance_fallback);
    }
}

TEST_CASE("select_demos: static policy is query-independent pool order") {
    const auto pool = make_pool();
    // At 90° similarity favours d6..d4; static still returns pool order.
    const auto result =
        demos::select_demos(pool, at_angle(90.0), 2, SelectionPolicy::static_pool, {}, 0);
    auto ids = ids_of(result.demos);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::string>{"d1", "d2"});

    // A tighter near-dup threshold drops d6 (cosine ~0.906) from the
    // eligible set but leaves the static prefix unchanged.
    const auto filtered = demos::select_demos(pool, at_angle(90.0), 2,
                                              SelectionPolicy::static_pool, {}, 0, 0.90);
    auto ids2 = ids_of(filtered.demos);
    std::sort(ids2.begin(), ids2.end());
    CHECK(ids2 == ids);
}

TEST_CASE("select_demos: shortfall is filled by seeded sampling, deterministically") {
    const auto pool = make_pool();
    // At 90° the diversity cap leaves d6, d4, d2 = 3 greedy picks for k=4;
    // the fourth comes from seeded sampling over {d5, d3, d1}.
    const auto a =
        demos::select_demos(pool, at_angle(90.0), 4, SelectionPolicy::similarity_only, {}, 11);
    const auto b =
        demos::select_demos(pool, at_angle(90.0), 4, SelectionPolicy::similarity_only, {}, 11);
    CHECK(a.demos.size() == 4);
    CHECK(ids_of(a.demos) == ids_of(b.demos));
    CHECK_FALSE(a.short_set);

    // Output is similarity-descending regardless of pick order.
    for (std::size_t i = 1; i < a.demos.size(); ++i) {
        CHECK(a.demos[i - 1].embedding.cosine(at_angle(90.0)) >=
              a.demos[i].embedding.cosine(at_angle(90.0)));
    }
    // No demo appears twice.
    auto ids = ids_of(a.demos);
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("select_demos: k_shots of zero selects nothing") {
    const auto pool = make_pool();
    const auto result =
        demos::select_demos(pool, at_angle(0.0), 0, SelectionPolicy::similarity_only, {}, 0);
    CHECK(result.demos.empty());
    CHECK_FALSE(result.short_set);
}

// ---------------------------------------------------------------------------
// Pool building
// ---------------------------------------------------------------------------

namespace {

std::vector<index::Document> small_corpus() {
    return {
        {"c1", "pmid-101", "Aspirin and stroke",
         "Aspirin reduces stroke risk in hypertensive adults."},
        {"c2", "pmid-102", "Metformin efficacy",
         "Metformin lowers fasting glucose in type 2 diabetes."},
        {"c3", "pmid-103", "Statin therapy",
         "Statin therapy reduces cholesterol and cardiovascular events."},
        {"c4", std::nullopt, "Warfarin monitoring",
         "Warfarin requires INR monitoring for anticoagulation."},
    };
}

std::vector<demos::TrainExample> train_records() {
    return {
        {"t1", "Does aspirin reduce stroke risk?", AnswerLabel::yes, {"pmid-101"}},
        {"t2", "Does metformin lower glucose?", AnswerLabel::yes, {"pmid-102"}},
        {"t3", "Does statin therapy reduce cholesterol?", AnswerLabel::yes, {"pmid-103"}},
        {"t4", "Eldritch zzyzx frobnication?", AnswerLabel::no, {}},
    };
}

}  // namespace

TEST_CASE("build_pool generates, embeds and logs skips") {
    const auto corpus = index::Bm25Index::build(small_corpus());
    clients::SyntheticChatClient generator(7);
    clients::HashEmbedClient embedder(16, 3);
    clients::SyntheticRerankClient reranker;

    demos::PoolBuildConfig cfg;
    cfg.k = 4;
    cfg.m = 2;
    cfg.dataset_kind = DatasetKind::bioasq;
    cfg.seed = 7;

    const auto result =
        demos::build_pool(train_records(), corpus, generator, embedder, reranker, cfg);
    CHECK(result.pool.demonstrations.size() == 3);
    REQUIRE(result.skipped.size() == 1);
    CHECK(result.skipped[0].id == "t4");
    CHECK(result.skipped[0].reason == "no passages retrieved");
    CHECK(result.pool.embed_dim == 16);
    CHECK(result.pool.build_seed == 7);
    CHECK(result.pool.source_split == "train");

    const auto& first = result.pool.demonstrations[0];
    CHECK(first.id == "t1");
    CHECK_FALSE(first.rationale.empty());
    CHECK(first.rationale.find("FINAL ANSWER") == std::string::npos);
    CHECK(first.label == AnswerLabel::yes);
    CHECK(first.evidence.size() <= 2);
    CHECK(first.embedding.norm() == doctest::Approx(1.0).epsilon(1e-9));
    // Record ids and the evidence documents' external ids both carry over.
    CHECK(first.external_ids.count("pmid-101") == 1);

    // Same inputs → identical pool.
    const auto again =
        demos::build_pool(train_records(), corpus, generator, embedder, reranker, cfg);
    REQUIRE(again.pool.demonstrations.size() == result.pool.demonstrations.size());
    for (std::size_t i = 0; i < again.pool.demonstrations.size(); ++i) {
        CHECK(again.pool.demonstrations[i].rationale == result.pool.demonstrations[i].rationale);
        CHECK(again.pool.demonstrations[i].embedding.values ==
              result.pool.demonstrations[i].embedding.values);
    }
}

TEST_CASE("build_pool skips on client errors without aborting") {
    const auto corpus = index::Bm25Index::build(small_corpus());
    clients::ScriptedChatClient generator;  // nothing scripted: every call errors
    clients::HashEmbedClient embedder(8, 0);
    clients::SyntheticRerankClient reranker;

    const auto result = demos::build_pool(train_records(), corpus, generator, embedder, reranker,
                                          demos::PoolBuildConfig{});
    CHECK(result.pool.demonstrations.empty());
    CHECK(result.skipped.size() == 4);  // 3 client errors + 1 empty retrieval
    int client_errors = 0;
    for (const auto& skip : result.skipped) {
        if (skip.reason.rfind("client error:", 0) == 0) ++client_errors;
    }
    CHECK(client_errors == 3);
}

TEST_CASE("pool persistence round-trips and detects tampering") {
    const auto corpus = index::Bm25Index::build(small_corpus());
    clients::SyntheticChatClient generator(7);
    clients::HashEmbedClient embedder(16, 3);
    clients::SyntheticRerankClient reranker;
    const auto built = demos::build_pool(train_records(), corpus, generator, embedder, reranker,
                                         demos::PoolBuildConfig{});

    const auto dir = std::filesystem::temp_directory_path() / "verirag_pool_test";
    std::filesystem::create_directories(dir);
    const std::string pool_path = (dir / "pool.jsonl").string();
    const std::string meta_path = (dir / "pool.meta.json").string();
    demos::save_pool(built, pool_path, meta_path, 0.98);

    const auto loaded = demos::load_pool(pool_path, meta_path);
    CHECK(loaded.embed_dim == built.pool.embed_dim);
    CHECK(loaded.source_split == built.pool.source_split);
    CHECK(loaded.build_seed == built.pool.build_seed);
    REQUIRE(loaded.demonstrations.size() == built.pool.demonstrations.size());
    for (std::size_t i = 0; i < loaded.demonstrations.size(); ++i) {
        const auto& a = loaded.demonstrations[i];
        const auto& b = built.pool.demonstrations[i];
        CHECK(a.id == b.id);
        CHECK(a.question == b.question);
        CHECK(a.rationale == b.rationale);
        CHECK(a.label == b.label);
        CHECK(a.embedding.values == b.embedding.values);
        CHECK(a.external_ids == b.external_ids);
        REQUIRE(a.evidence.size() == b.evidence.size());
        for (std::size_t j = 0; j < a.evidence.size(); ++j) {
            CHECK(a.evidence[j].doc_id == b.evidence[j].doc_id);
            CHECK(a.evidence[j].bm25_score == b.evidence[j].bm25_score);
            CHECK(a.evidence[j].rerank_score == b.evidence[j].rerank_score);
        }
    }

    // Appending a forged record breaks the fingerprint.
    {
        std::ofstream out(pool_path, std::ios::app);
        nlohmann::json forged = nlohmann::json::parse(read_text_file(pool_path).substr(
            0, read_text_file(pool_path).find('\n')));
        out << forged.dump() << "\n";
    }
    CHECK_THROWS_AS(demos::load_pool(pool_path, meta_path), DataError);
    std::filesystem::remove_all(dir);
}
