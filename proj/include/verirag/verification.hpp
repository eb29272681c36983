#pragma once

/// \file verification.hpp
/// Rationale verification: deterministic segmentation into atomic
/// statements, eight-category judging against the evidence, faithfulness
/// and the binary rationale verdict.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "verirag/common.hpp"
#include "verirag/evidence.hpp"
#include "verirag/model_clients.hpp"

namespace verirag::verification {

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class VerificationLabel {
    correct_explicit,
    correct_implicit,
    correct_additional,
    correct_missing,
    incorrect_false,
    incorrect_deviating,
    incorrect_illogical,
    incorrect_missing,
};

std::string to_string(VerificationLabel label);  // e.g. "CORRECT-EXPLICIT"
VerificationLabel verification_label_from_string(const std::string& s);

/// The support indicator: 1 iff the label prefix is CORRECT.
bool is_correct(VerificationLabel label);

constexpr std::array<VerificationLabel, 8> all_verification_labels() {
    return {VerificationLabel::correct_explicit,   VerificationLabel::correct_implicit,
            VerificationLabel::correct_additional, VerificationLabel::correct_missing,
            VerificationLabel::incorrect_false,    VerificationLabel::incorrect_deviating,
            VerificationLabel::incorrect_illogical, VerificationLabel::incorrect_missing};
}

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

struct AtomicStatement {
    std::size_t index = 0;           // position within the rationale
    std::string text;                // non-empty after trimming
    std::size_t sentence_index = 0;  // originating sentence
};

/// Deterministic rule-based segmentation: sentences at terminal
/// punctuation, clause splits at {because, therefore, however, which
/// suggests}, semicolons and enumeration delimiters, then a merge pass for
/// fragments that are not self-contained (shorter than 3 tokens, or
/// pronoun-initial with no later noun-phrase marker). Empty rationale →
/// empty sequence.
std::vector<AtomicStatement> segment(const std::string& rationale);

// ---------------------------------------------------------------------------
// Judging
// ---------------------------------------------------------------------------

struct StatementVerdict {
    AtomicStatement statement;
    VerificationLabel label = VerificationLabel::incorrect_missing;
    bool supported = false;  // indicator I_j; equals is_correct(label)
    std::string judge_rationale;
    bool invalid_output = false;  // judge output unparseable twice
};

struct RationaleVerdict {
    std::vector<StatementVerdict> verdicts;
    double faithfulness = 0.0;  // (sum of indicators) / n
    bool overall_correct = false;
    std::size_t context_j = 0;  // passages shown to the judge
};

/// System prompt for the judge: the eight category definitions and the
/// required LABEL:/REASON: output format.
const std::string& judge_system_prompt();

/// User message: question, the top-context_j passages, the statement.
std::string build_judge_prompt(const std::string& query, const EvidenceSet& evidence,
                               std::size_t context_j, const AtomicStatement& statement);

/// One verdict per statement, order preserved. The judge sees only the top
/// context_j passages. Unparseable judge output is retried once, then
/// mapped to INCORRECT-MISSING with the invalid flag. Client errors
/// propagate. Preconditions: 1 <= context_j <= |evidence|, statements
/// non-empty.
std::vector<StatementVerdict> verify_statements(clients::ChatClient& judge,
                                                const std::string& query,
                                                const EvidenceSet& evidence,
                                                std::size_t context_j,
                                                const std::vector<AtomicStatement>& statements);

/// (Σ I_j) / n exactly; throws std::invalid_argument when n = 0.
double faithfulness(const std::vector<StatementVerdict>& verdicts);

/// CORRECT iff faithfulness >= 0.5 and no INCORRECT-FALSE label present;
/// throws std::invalid_argument when n = 0.
bool overall_verdict(const std::vector<StatementVerdict>& verdicts);

/// segment + verify_statements + aggregate.
RationaleVerdict verify_rationale(clients::ChatClient& judge, const std::string& query,
                                  const EvidenceSet& evidence, std::size_t context_j,
                                  const std::string& rationale);

}  // namespace verirag::verification
