#pragma once

/// \file metrics.hpp
/// Agreement and accuracy metrics over aligned label sequences: exact-match
/// accuracy, Cohen's kappa with Landis-Koch bands, and per-category
/// precision/recall/F1.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "verirag/common.hpp"
#include "verirag/verification.hpp"

namespace verirag::metrics {

// ---------------------------------------------------------------------------
// Label vectors
// ---------------------------------------------------------------------------

/// One rater's labels over a set of items, in a declared label space. Kappa
/// and F1 are computed over the space as plain strings so the same code
/// serves the eight-category taxonomy and its binary collapse.
struct LabelVector {
    std::string rater_id;
    std::vector<std::string> item_ids;
    std::vector<std::string> labels;
    std::vector<std::string> space;

    /// Throws std::invalid_argument unless item_ids and labels are the same
    /// non-zero length and every label is in the declared space.
    void validate() const;
};

/// Wrap verification labels in a LabelVector over the full eight-way space.
LabelVector make_label_vector(std::string rater_id, std::vector<std::string> item_ids,
                              const std::vector<verification::VerificationLabel>& labels);

/// Collapse each label to the text before its first '-' (CORRECT-EXPLICIT ->
/// CORRECT). Idempotent; the result's space is {CORRECT, INCORRECT}.
LabelVector collapse_binary(const LabelVector& v);

/// Read a rater's labels from JSONL lines of {"item_id", "label"} (optional
/// "rater" field overrides rater_id). Lines are sorted by item_id so two
/// files annotating the same items align. The space is the eight-way
/// taxonomy, or {CORRECT, INCORRECT} when every label is already collapsed.
LabelVector load_label_file(const std::string& path, std::string rater_id);

// ---------------------------------------------------------------------------
// Accuracy
// ---------------------------------------------------------------------------

/// Exact-match fraction. abstain never counts as a match, so abstentions are
/// scored as errors by construction.
double accuracy(const std::vector<AnswerLabel>& predictions,
                const std::vector<AnswerLabel>& golds);

// ---------------------------------------------------------------------------
// Cohen's kappa
// ---------------------------------------------------------------------------

enum class KappaBand { below_chance, slight, fair, moderate, substantial, almost_perfect };

std::string to_string(KappaBand band);

/// Landis-Koch interpretation: slight (0.00-0.20], fair (0.20-0.40],
/// moderate (0.40-0.60], substantial (0.60-0.80], almost perfect
/// (0.80-1.00]; negative kappa is below chance.
KappaBand kappa_band(double kappa);

struct KappaResult {
    double kappa = 0.0;
    double p_o = 0.0;  ///< observed agreement
    double p_e = 0.0;  ///< expected (chance) agreement from marginal products
    KappaBand band = KappaBand::slight;
    /// Both raters constant on the same label (p_e = 1): kappa is then
    /// defined as 1.0 on perfect agreement and 0.0 otherwise.
    bool degenerate = false;
};

/// Two-rater kappa from the confusion matrix. The vectors must agree on
/// item_ids and declared space; throws std::invalid_argument otherwise.
KappaResult cohens_kappa(const LabelVector& a, const LabelVector& b);

// ---------------------------------------------------------------------------
// Per-category precision / recall / F1
// ---------------------------------------------------------------------------

struct CategoryF1 {
    std::string category;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  ///< reference occurrences of the category
};

/// One record per category present in either vector, in declared-space
/// order. `reference` supplies the ground truth (the human labels when
/// comparing human vs judge).
std::vector<CategoryF1> per_category_f1(const LabelVector& reference,
                                        const LabelVector& candidate);

/// Micro-averaged F1 over all categories; equals the overall agreement rate.
double micro_f1(const LabelVector& reference, const LabelVector& candidate);

// ---------------------------------------------------------------------------
// Agreement reports
// ---------------------------------------------------------------------------

/// Machine-readable agreement summary for one rater pair: kappa, per-category
/// F1 and micro-F1 in the full space, plus kappa after binary collapse.
nlohmann::json agreement_to_json(const LabelVector& reference, const LabelVector& candidate);

/// Human-readable rendering of agreement_to_json output.
std::string render_agreement(const nlohmann::json& report);

}  // namespace verirag::metrics
