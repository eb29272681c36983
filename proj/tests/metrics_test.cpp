#include "verirag/metrics.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

#include "verirag/jsonl.hpp"

using namespace verirag;
using verification::all_verification_labels;
using verification::VerificationLabel;
using metrics::KappaBand;
using metrics::LabelVector;

namespace {

std::vector<std::string> numbered_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("item" + std::to_string(i));
    return ids;
}

LabelVector binary_vector(std::string rater, std::vector<std::string> labels) {
    LabelVector v;
    v.rater_id = std::move(rater);
    v.item_ids = numbered_ids(labels.size());
    v.labels = std::move(labels);
    v.space = {"CORRECT", "INCORRECT"};
    return v;
}

LabelVector taxonomy_vector(std::string rater, const std::vector<VerificationLabel>& labels) {
    return metrics::make_label_vector(std::move(rater), numbered_ids(labels.size()), labels);
}

}  // namespace

TEST_CASE("accuracy is the exact-match fraction and abstain never matches") {
    using enum AnswerLabel;
    const std::vector<AnswerLabel> golds = {yes, yes, no, no, yes, no, yes, no, yes, no};
    std::vector<AnswerLabel> preds = golds;
    CHECK(metrics::accuracy(preds, golds) == 1.0);

    for (std::size_t i = 0; i < 5; ++i) preds[i] = preds[i] == yes ? no : yes;
    CHECK(metrics::accuracy(preds, golds) == 0.5);

    CHECK(metrics::accuracy(std::vector<AnswerLabel>(10, abstain), golds) == 0.0);

    // Invariant under a consistent permutation of the pairs.
    std::vector<AnswerLabel> preds_rev(preds.rbegin(), preds.rend());
    std::vector<AnswerLabel> golds_rev(golds.rbegin(), golds.rend());
    CHECK(metrics::accuracy(preds_rev, golds_rev) == metrics::accuracy(preds, golds));

    CHECK_THROWS_AS(metrics::accuracy({yes}, golds), std::invalid_argument);
    CHECK_THROWS_AS(metrics::accuracy({}, {}), std::invalid_argument);
}

TEST_CASE("cohens_kappa recovers the hand-computed two-rater example") {
    const auto a = binary_vector("A", {"CORRECT", "CORRECT", "INCORRECT", "INCORRECT"});
    const auto b = binary_vector("B", {"CORRECT", "INCORRECT", "INCORRECT", "INCORRECT"});

    const auto result = metrics::cohens_kappa(a, b);
    CHECK(result.p_o == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(result.p_e == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.kappa == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.band == KappaBand::moderate);
    CHECK_FALSE(result.degenerate);

    // Symmetric in its arguments.
    const auto flipped = metrics::cohens_kappa(b, a);
    CHECK(flipped.kappa == result.kappa);
    CHECK(flipped.p_o == result.p_o);
    CHECK(flipped.p_e == result.p_e);
}

TEST_CASE("cohens_kappa edge cases") {
    SUBCASE("identical non-constant vectors score 1.0") {
        const auto a = binary_vector("A", {"CORRECT", "INCORRECT", "CORRECT"});
        const auto result = metrics::cohens_kappa(a, a);
        CHECK(result.kappa == 1.0);
        CHECK(result.band == KappaBand::almost_perfect);
        CHECK_FALSE(result.degenerate);
    }
    SUBCASE("both raters constant on the same label is degenerate") {
        const auto a = binary_vector("A", {"CORRECT", "CORRECT", "CORRECT"});
        const auto result = metrics::cohens_kappa(a, a);
        CHECK(result.degenerate);
        CHECK(result.p_e == 1.0);
        CHECK(result.p_o == 1.0);
        CHECK(result.kappa == 1.0);
    }
    SUBCASE("systematic disagreement goes below chance") {
        const auto a = binary_vector("A", {"CORRECT", "INCORRECT", "CORRECT", "INCORRECT"});
        const auto b = binary_vector("B", {"INCORRECT", "CORRECT", "INCORRECT", "CORRECT"});
        const auto result = metrics::cohens_kappa(a, b);
        CHECK(result.kappa < 0.0);
        CHECK(result.band == KappaBand::below_chance);
    }
    SUBCASE("kappa never exceeds observed agreement") {
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::string> la, lb;
            for (int i = 0; i < 30; ++i) {
                la.push_back(rng() % 2 ? "CORRECT" : "INCORRECT");
                lb.push_back(rng() % 2 ? "CORRECT" : "INCORRECT");
            }
            const auto result =
                metrics::cohens_kappa(binary_vector("A", la), binary_vector("B", lb));
            CHECK(result.kappa <= result.p_o + 1e-12);
        }
    }
    SUBCASE("misaligned inputs are rejected") {
        auto a = binary_vector("A", {"CORRECT", "INCORRECT"});
        auto b = binary_vector("B", {"CORRECT", "INCORRECT"});
        b.item_ids[1] = "other";
        CHECK_THROWS_AS(metrics::cohens_kappa(a, b), std::invalid_argument);
        b = binary_vector("B", {"CORRECT"});
        CHECK_THROWS_AS(metrics::cohens_kappa(a, b), std::invalid_argument);
    }
}

TEST_CASE("kappa_band follows the published cut points") {
    CHECK(metrics::kappa_band(-0.10) == KappaBand::below_chance);
    CHECK(metrics::kappa_band(0.00) == KappaBand::slight);
    CHECK(metrics::kappa_band(0.20) == KappaBand::slight);
    CHECK(metrics::kappa_band(0.21) == KappaBand::fair);
    CHECK(metrics::kappa_band(0.40) == KappaBand::fair);
    CHECK(metrics::kappa_band(0.41) == KappaBand::moderate);
    CHECK(metrics::kappa_band(0.60) == KappaBand::moderate);
    CHECK(metrics::kappa_band(0.61) == KappaBand::substantial);
    CHECK(metrics::kappa_band(0.80) == KappaBand::substantial);
    CHECK(metrics::kappa_band(0.81) == KappaBand::almost_perfect);
    CHECK(metrics::kappa_band(1.00) == KappaBand::almost_perfect);
}

TEST_CASE("per_category_f1 recovers the hand-computed counts") {
    using enum VerificationLabel;
    const auto reference =
        taxonomy_vector("human", {correct_explicit, correct_explicit, incorrect_false});
    const auto candidate =
        taxonomy_vector("judge", {correct_explicit, incorrect_false, incorrect_false});

    const auto rows = metrics::per_category_f1(reference, candidate);
    REQUIRE(rows.size() == 2);

    CHECK(rows[0].category == "CORRECT-EXPLICIT");
    CHECK(rows[0].precision == 1.0);
    CHECK(rows[0].recall == 0.5);
    CHECK(rows[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(rows[0].support == 2);

    CHECK(rows[1].category == "INCORRECT-FALSE");
    CHECK(rows[1].precision == 0.5);
    CHECK(rows[1].recall == 1.0);
    CHECK(rows[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(rows[1].support == 1);

    CHECK(metrics::micro_f1(reference, candidate) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("per_category_f1 edge cases") {
    using enum VerificationLabel;
    SUBCASE("perfect candidate scores 1.0 wherever there is support") {
        const auto reference = taxonomy_vector(
            "human", {correct_implicit, incorrect_deviating, correct_implicit, correct_missing});
        const auto rows = metrics::per_category_f1(reference, reference);
        REQUIRE(rows.size() == 3);
        for (const auto& row : rows) {
            CHECK(row.f1 == 1.0);
            CHECK(row.support > 0);
        }
    }
    SUBCASE("category missing from the candidate gets zero recall and f1") {
        const auto reference = taxonomy_vector("human", {incorrect_illogical, correct_explicit});
        const auto candidate = taxonomy_vector("judge", {correct_explicit, correct_explicit});
        const auto rows = metrics::per_category_f1(reference, candidate);
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].category == "INCORRECT-ILLOGICAL");
        CHECK(rows[1].recall == 0.0);
        CHECK(rows[1].f1 == 0.0);
        CHECK(rows[1].support == 1);
        // The candidate-only view: over-predicted category has support 0.
        const auto reverse = metrics::per_category_f1(candidate, reference);
        CHECK(reverse[1].category == "INCORRECT-ILLOGICAL");
        CHECK(reverse[1].support == 0);
        CHECK(reverse[1].precision == 0.0);
    }
    SUBCASE("micro-F1 equals the agreement rate on random vectors") {
        std::mt19937_64 rng(7);
        const auto all = all_verification_labels();
        std::vector<VerificationLabel> la, lb;
        for (int i = 0; i < 200; ++i) {
            la.push_back(all[rng() % all.size()]);
            lb.push_back(all[rng() % all.size()]);
        }
        const auto reference = taxonomy_vector("A", la);
        const auto candidate = taxonomy_vector("B", lb);
        const auto micro = metrics::micro_f1(reference, candidate);
        CHECK(micro == metrics::cohens_kappa(reference, candidate).p_o);
    }
}

TEST_CASE("collapse_binary keeps the leading label segment") {
    using enum VerificationLabel;
    const auto full = taxonomy_vector(
        "human", {correct_explicit, correct_additional, incorrect_false, incorrect_missing});
    const auto collapsed = metrics::collapse_binary(full);
    CHECK(collapsed.labels ==
          std::vector<std::string>{"CORRECT", "CORRECT", "INCORRECT", "INCORRECT"});
    CHECK(collapsed.space == std::vector<std::string>{"CORRECT", "INCORRECT"});
    CHECK(collapsed.rater_id == "human");
    // Idempotent.
    const auto twice = metrics::collapse_binary(collapsed);
    CHECK(twice.labels == collapsed.labels);
}

TEST_CASE("label files load sorted, validated, and space-inferred") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "verirag_metrics_test";
    fs::create_directories(dir);
    const auto path = [&](const char* name) { return (dir / name).string(); };

    write_text_file(path("full.jsonl"),
                    "{\"item_id\": \"s2\", \"label\": \"INCORRECT-FALSE\"}\n"
                    "{\"item_id\": \"s1\", \"label\": \"CORRECT-EXPLICIT\"}\n"
                    "{\"item_id\": \"s3\", \"label\": \"CORRECT-IMPLICIT\", \"rater\": \"ann1\"}\n");
    const auto full = metrics::load_label_file(path("full.jsonl"), "default");
    CHECK(full.rater_id == "ann1");
    CHECK(full.item_ids == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(full.labels ==
          std::vector<std::string>{"CORRECT-EXPLICIT", "INCORRECT-FALSE", "CORRECT-IMPLICIT"});
    CHECK(full.space.size() == 8);

    write_text_file(path("binary.jsonl"),
                    "{\"item_id\": \"s1\", \"label\": \"CORRECT\"}\n"
                    "{\"item_id\": \"s2\", \"label\": \"INCORRECT\"}\n");
    const auto binary = metrics::load_label_file(path("binary.jsonl"), "ann2");
    CHECK(binary.space == std::vector<std::string>{"CORRECT", "INCORRECT"});
    CHECK(binary.rater_id == "ann2");

    write_text_file(path("unknown.jsonl"), "{\"item_id\": \"s1\", \"label\": \"CORRECT-MAYBE\"}\n");
    CHECK_THROWS_AS(metrics::load_label_file(path("unknown.jsonl"), "x"), DataError);

    write_text_file(path("mixed.jsonl"),
                    "{\"item_id\": \"s1\", \"label\": \"CORRECT\"}\n"
                    "{\"item_id\": \"s2\", \"label\": \"CORRECT-EXPLICIT\"}\n");
    CHECK_THROWS_AS(metrics::load_label_file(path("mixed.jsonl"), "x"), DataError);

    write_text_file(path("dup.jsonl"),
                    "{\"item_id\": \"s1\", \"label\": \"CORRECT\"}\n"
                    "{\"item_id\": \"s1\", \"label\": \"INCORRECT\"}\n");
    CHECK_THROWS_AS(metrics::load_label_file(path("dup.jsonl"), "x"), DataError);

    write_text_file(path("missing.jsonl"), "{\"item_id\": \"s1\"}\n");
    CHECK_THROWS_AS(metrics::load_label_file(path("missing.jsonl"), "x"), DataError);

    write_text_file(path("empty.jsonl"), "\n");
    CHECK_THROWS_AS(metrics::load_label_file(path("empty.jsonl"), "x"), DataError);

    fs::remove_all(dir);
}

TEST_CASE("agreement reports carry kappa, per-category F1, and the binary collapse") {
    using enum VerificationLabel;
    const auto reference =
        taxonomy_vector("ann1", {correct_explicit, correct_explicit, incorrect_false});
    const auto candidate =
        taxonomy_vector("judge", {correct_explicit, incorrect_false, incorrect_false});

    const auto report = metrics::agreement_to_json(reference, candidate);
    CHECK(report.at("reference") == "ann1");
    CHECK(report.at("candidate") == "judge");
    CHECK(report.at("items") == 3);
    CHECK(report.at("kappa").at("value").get<double>() == doctest::Approx(0.4).epsilon(1e-9));
    // Band always matches the reported value, even on a cut point.
    CHECK(report.at("kappa").at("band") ==
          to_string(metrics::kappa_band(report.at("kappa").at("value").get<double>())));
    CHECK(report.at("kappa").at("p_o").get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(report.at("micro_f1").get<double>() == doctest::Approx(2.0 / 3.0));
    CHECK(report.at("per_category").size() == 2);
    // The one disagreement already crosses the binary boundary, so the
    // collapse leaves observed agreement unchanged here.
    CHECK(report.at("binary_kappa").at("p_o").get<double>() == doctest::Approx(2.0 / 3.0));

    const auto rendered = metrics::render_agreement(report);
    CHECK(rendered.find("ann1 vs judge") != std::string::npos);
    CHECK(rendered.find("CORRECT-EXPLICIT") != std::string::npos);
    CHECK(rendered.find("micro-F1") != std::string::npos);
}
