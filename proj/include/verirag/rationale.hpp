#pragma once

/// \file rationale.hpp
/// Prompt assembly (system instruction + demonstrations + evidence +
/// question), and parsing of the final answer and rationale out of raw
/// generator output. All functions are pure.

#include <string>
#include <vector>

#include "verirag/common.hpp"
#include "verirag/demonstrations.hpp"
#include "verirag/evidence.hpp"
#include "verirag/model_clients.hpp"

namespace verirag::rationale {

// ---------------------------------------------------------------------------
// Prompt assets (versioned text, embedded verbatim; covered by golden tests)
// ---------------------------------------------------------------------------

const std::string& base_instruction();
const std::string& bioasq_suffix();
const std::string& pubmedqa_suffix();
/// Fixed template for the query rewriter role.
const std::string& rewrite_system_prompt();

/// base instruction + dataset-specific suffix.
std::string system_instruction(DatasetKind kind);

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

struct AssembledPrompt {
    std::string system;
    std::vector<std::string> demo_blocks;  // similarity order, rendered
    std::string evidence_block;            // "Document [i] ..." lines
    std::string question;
    std::size_t token_estimate = 0;  // whitespace tokens across system+user

    /// Demonstration blocks, then the evidence block, then the question.
    std::string user_message() const;
    clients::GenerationRequest to_request(const std::string& model) const;
};

/// Renders one demonstration: its evidence documents, question, rationale
/// and the final-answer line for its gold label.
std::string render_demo_block(const demos::Demonstration& demo);

/// The final-answer line for a label ("FINAL ANSWER: A. yes", ...,
/// "ANSWER UNAVAILABLE" for abstain).
std::string answer_line(AnswerLabel label);

/// Evidence passages must be non-empty; numbering follows EvidenceSet
/// order, demonstrations precede evidence.
AssembledPrompt build_prompt(const std::string& query, const EvidenceSet& evidence,
                             const std::vector<demos::Demonstration>& demonstrations,
                             DatasetKind kind);

// ---------------------------------------------------------------------------
// Output parsing
// ---------------------------------------------------------------------------

struct ParsedAnswer {
    AnswerLabel label = AnswerLabel::abstain;
    bool parse_ok = false;
    /// The answer line carried a letter and a word that disagree; the word
    /// governed.
    bool letter_word_conflict = false;
};

/// Scans for final-answer lines case-insensitively; the LAST in-label-space
/// match wins. "ANSWER UNAVAILABLE" maps to abstain only when no answer
/// line follows it. Never throws; no match → abstain with parse_ok=false.
ParsedAnswer parse_final_answer(const std::string& raw, DatasetKind kind);

/// Text preceding the final-answer line, trimmed; the entire raw text when
/// abstaining or unparsed.
std::string extract_rationale(const std::string& raw);

struct GenerationOutcome {
    std::string raw;
    std::string rationale;
    AnswerLabel answer = AnswerLabel::abstain;
    bool parse_ok = false;
    bool letter_word_conflict = false;
    bool empty_rationale = false;  // raw began with the answer line
};

GenerationOutcome parse_generation(const std::string& raw, DatasetKind kind);

}  // namespace verirag::rationale
