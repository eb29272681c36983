#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_map>

#include "verirag/corpus_index.hpp"

using namespace verirag;
using namespace verirag::index;

namespace {

/// Independent brute-force Okapi BM25: score every document directly from
/// the token streams, no inverted index. Per-document accumulation follows
/// query token order so doubles can be compared exactly.
std::vector<ScoredPassage> brute_force_bm25(const std::vector<Document>& docs,
                                            const std::string& query, Bm25Params params,
                                            std::size_t k) {
    std::vector<std::vector<std::string>> doc_tokens;
    doc_tokens.reserve(docs.size());
    for (const auto& d : docs) doc_tokens.push_back(normalize_and_tokenize(document_text(d), false));

    double total = 0.0;
    for (const auto& toks : doc_tokens) total += static_cast<double>(toks.size());
    const double avg_len = docs.empty() ? 0.0 : total / static_cast<double>(docs.size());
    const double n_docs = static_cast<double>(docs.size());

    auto df_of = [&](const std::string& term) {
        std::size_t df = 0;
        for (const auto& toks : doc_tokens) {
            for (const auto& t : toks) {
                if (t == term) {
                    ++df;
                    break;
                }
            }
        }
        return df;
    };

    const auto query_tokens = normalize_and_tokenize(query, false);
    std::vector<double> scores(docs.size(), 0.0);
    std::vector<bool> matched(docs.size(), false);
    for (const auto& term : query_tokens) {
        const double df = static_cast<double>(df_of(term));
        if (df == 0.0) continue;
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            std::size_t tf_count = 0;
            for (const auto& t : doc_tokens[i]) {
                if (t == term) ++tf_count;
            }
            if (tf_count == 0) continue;
            const double tf = static_cast<double>(tf_count);
            const double norm =
                avg_len > 0.0 ? static_cast<double>(doc_tokens[i].size()) / avg_len : 1.0;
            scores[i] += idf * tf * (params.k1 + 1.0) /
                         (tf + params.k1 * (1.0 - params.b + params.b * norm));
            matched[i] = true;
        }
    }

    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (matched[i]) hits.push_back(i);
    }
    std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return docs[a].doc_id < docs[b].doc_id;
    });
    if (hits.size() > k) hits.resize(k);

    std::vector<ScoredPassage> out;
    for (std::size_t i : hits) {
        out.push_back({docs[i].doc_id, document_text(docs[i]), scores[i], std::nullopt});
    }
    return out;
}

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "verirag_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("tokenizer normalizes, splits and filters") {
    CHECK(normalize_and_tokenize("Aspirin, and stroke.", true) ==
          std::vector<std::string>{"aspirin", "stroke"});
    CHECK(normalize_and_tokenize("", true).empty());
    CHECK(normalize_and_tokenize("BRCA1/BRCA2", false) ==
          std::vector<std::string>{"brca1", "brca2"});
    CHECK(normalize_and_tokenize("COVID-19 mRNA vaccines!", false) ==
          std::vector<std::string>{"covid", "19", "mrna", "vaccines"});
}

TEST_CASE("tokenizer folds diacritics to ASCII") {
    CHECK(normalize_and_tokenize("naïve Müller œdème", false) ==
          std::vector<std::string>{"naive", "muller", "oedeme"});
    CHECK(normalize_and_tokenize("Škoda — spaß", false) ==
          std::vector<std::string>{"skoda", "spass"});
}

TEST_CASE("tokenization is idempotent") {
    const std::string text = "Émile's notes: COVID-19, naïve B-cells (n=42)!";
    auto once = normalize_and_tokenize(text, false);
    std::string joined;
    for (const auto& t : once) {
        if (!joined.empty()) joined += ' ';
        joined += t;
    }
    CHECK(normalize_and_tokenize(joined, false) == once);
}

TEST_CASE("stopword list is version 1 with 175 entries") {
    const auto& words = english_stopwords();
    CHECK(words.size() == 175);
    for (const char* w : {"and", "the", "of", "because", "therefore", "however", "does", "not"}) {
        CHECK(words.count(w) == 1);
    }
    CHECK(words.count("aspirin") == 0);
}

TEST_CASE("index stats") {
    std::vector<Document> docs = {
        {"d1", std::nullopt, "", "alpha beta gamma delta"},
        {"d2", std::nullopt, "", "one two three four five six"},
        {"d3", std::nullopt, "", "epsilon zeta"},
    };
    auto index = Bm25Index::build(docs);
    CHECK(index.stats().doc_count == 3);
    CHECK(index.stats().doc_len.at("d1") == 4);
    CHECK(index.stats().doc_len.at("d2") == 6);
    CHECK(index.stats().doc_freq.at("alpha") == 1);

    auto two = Bm25Index::build({docs[0], docs[1]});
    CHECK(two.stats().avg_doc_len == doctest::Approx(5.0));
}

TEST_CASE("duplicate doc_id rejected with identifier") {
    std::vector<Document> docs = {{"dup", std::nullopt, "", "a"}, {"dup", std::nullopt, "", "b"}};
    CHECK_THROWS_WITH_AS(Bm25Index::build(docs), doctest::Contains("dup"), DataError);
}

TEST_CASE("empty index retrieves nothing") {
    auto index = Bm25Index::build({});
    CHECK(index.retrieve("anything", 5).empty());
}

TEST_CASE("higher term frequency ranks first at equal length") {
    std::vector<Document> docs = {
        {"d1", std::nullopt, "", "aspirin aspirin trial outcome"},
        {"d2", std::nullopt, "", "aspirin placebo trial outcome"},
    };
    auto index = Bm25Index::build(docs);
    auto hits = index.retrieve("aspirin", 10);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].doc_id == "d1");
    CHECK(hits[1].doc_id == "d2");
    CHECK(hits[0].bm25_score > hits[1].bm25_score);

    auto oracle = brute_force_bm25(docs, "aspirin", {}, 10);
    CHECK(oracle[0].doc_id == "d1");
}

TEST_CASE("absent query terms yield no hits") {
    auto index = Bm25Index::build({{"d1", std::nullopt, "", "alpha beta"}});
    CHECK(index.retrieve("zebra quark", 5).empty());
}

TEST_CASE("k larger than corpus returns whole corpus") {
    std::vector<Document> docs;
    for (int i = 0; i < 5; ++i) {
        docs.push_back({"d" + std::to_string(i), std::nullopt, "", "shared term here"});
    }
    auto index = Bm25Index::build(docs);
    CHECK(index.retrieve("shared", 20).size() == 5);
    CHECK_THROWS_AS(index.retrieve("shared", 0), std::invalid_argument);
}

TEST_CASE("equal scores tie-break by doc_id ascending") {
    std::vector<Document> docs = {
        {"z9", std::nullopt, "", "metformin dose"},
        {"a1", std::nullopt, "", "metformin dose"},
        {"m5", std::nullopt, "", "metformin dose"},
    };
    auto index = Bm25Index::build(docs);
    auto hits = index.retrieve("metformin", 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].doc_id == "a1");
    CHECK(hits[1].doc_id == "m5");
    CHECK(hits[2].doc_id == "z9");
}

TEST_CASE("retrieval matches a brute-force scorer on random corpora") {
    std::mt19937_64 rng(20240817);
    const std::vector<std::string> vocab = {
        "aspirin", "stroke",  "risk",    "trial",    "placebo", "metformin", "glucose",
        "cancer",  "therapy", "dose",    "patients", "outcome", "mortality", "vaccine",
        "immune",  "antibody", "cohort", "screening", "biopsy",  "remission"};

    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n_docs = 1 + bounded_uniform(rng, 100);
        std::vector<Document> docs;
        docs.reserve(n_docs);
        for (std::size_t d = 0; d < n_docs; ++d) {
            const std::size_t len = 3 + bounded_uniform(rng, 30);
            std::string body;
            for (std::size_t t = 0; t < len; ++t) {
                if (!body.empty()) body += ' ';
                body += vocab[bounded_uniform(rng, vocab.size())];
            }
            std::string id = "doc" + std::string(d < 10 ? "00" : d < 100 ? "0" : "") + std::to_string(d);
            docs.push_back({id, std::nullopt, "", body});
        }
        std::string query;
        const std::size_t q_len = 1 + bounded_uniform(rng, 4);
        for (std::size_t t = 0; t < q_len; ++t) {
            if (!query.empty()) query += ' ';
            query += vocab[bounded_uniform(rng, vocab.size())];
        }
        const std::size_t k = 1 + bounded_uniform(rng, 20);

        auto index = Bm25Index::build(docs);
        auto got = index.retrieve(query, k);
        auto want = brute_force_bm25(docs, query, {}, k);

        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].doc_id == want[i].doc_id);
            CHECK(got[i].bm25_score == doctest::Approx(want[i].bm25_score).epsilon(1e-9));
        }
        for (std::size_t i = 1; i < got.size(); ++i) {
            CHECK(got[i - 1].bm25_score >= got[i].bm25_score);
        }
    }
}

TEST_CASE("re-indexing the same documents reproduces retrieval") {
    std::vector<Document> docs = {
        {"d1", std::string("PMID1"), "Aspirin trial", "Low dose aspirin reduced stroke risk."},
        {"d2", std::nullopt, "Metformin study", "Metformin improved glucose control."},
        {"d3", std::string("PMID3"), "Stroke cohort", "Stroke outcomes in a large cohort."},
    };
    auto a = Bm25Index::build(docs);
    auto b = Bm25Index::build(docs);
    auto ha = a.retrieve("aspirin stroke", 3);
    auto hb = b.retrieve("aspirin stroke", 3);
    REQUIRE(ha.size() == hb.size());
    for (std::size_t i = 0; i < ha.size(); ++i) {
        CHECK(ha[i].doc_id == hb[i].doc_id);
        CHECK(ha[i].bm25_score == hb[i].bm25_score);
    }
}

TEST_CASE("index save/load round trip") {
    std::vector<Document> docs = {
        {"d1", std::string("PMID1"), "Aspirin trial", "Low dose aspirin reduced stroke risk."},
        {"d2", std::nullopt, "Metformin study", "Metformin improved glucose control."},
    };
    auto index = Bm25Index::build(docs, {1.4, 0.6});
    auto path = temp_path("index_roundtrip.json");
    index.save(path.string());
    auto loaded = Bm25Index::load(path.string());

    CHECK(loaded.params().k1 == doctest::Approx(1.4));
    CHECK(loaded.params().b == doctest::Approx(0.6));
    CHECK(loaded.stats().doc_count == 2);
    REQUIRE(loaded.find("d2") != nullptr);
    CHECK_FALSE(loaded.find("d2")->external_id.has_value());

    auto before = index.retrieve("aspirin stroke", 2);
    auto after = loaded.retrieve("aspirin stroke", 2);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].doc_id == after[i].doc_id);
        CHECK(before[i].bm25_score == after[i].bm25_score);
    }
}

TEST_CASE("corpus JSONL loader validates bodies and reports lines") {
    auto good = temp_path("corpus_good.jsonl");
    {
        std::ofstream out(good);
        out << R"({"doc_id":"d1","external_id":"PMID1","title":"T","body":"Aspirin works."})" << "\n";
        out << "\n";  // blank lines are skipped
        out << R"({"doc_id":"d2","external_id":null,"title":"","body":"Metformin too."})" << "\n";
    }
    auto docs = load_corpus_jsonl(good.string());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].external_id == std::string("PMID1"));
    CHECK_FALSE(docs[1].external_id.has_value());

    auto bad = temp_path("corpus_bad.jsonl");
    {
        std::ofstream out(bad);
        out << R"({"doc_id":"d1","external_id":null,"title":"T","body":"fine body"})" << "\n";
        out << R"({"doc_id":"d2","external_id":null,"title":"T","body":"..."})" << "\n";
    }
    try {
        load_corpus_jsonl(bad.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.line() == 2);
    }
}
