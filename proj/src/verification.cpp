#include "verirag/verification.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_set>

#include "verirag/corpus_index.hpp"

namespace verirag::verification {

std::string to_string(VerificationLabel label) {
    switch (label) {
        case VerificationLabel::correct_explicit: return "CORRECT-EXPLICIT";
        case VerificationLabel::correct_implicit: return "CORRECT-IMPLICIT";
        case VerificationLabel::correct_additional: return "CORRECT-ADDITIONAL";
        case VerificationLabel::correct_missing: return "CORRECT-MISSING";
        case VerificationLabel::incorrect_false: return "INCORRECT-FALSE";
        case VerificationLabel::incorrect_deviating: return "INCORRECT-DEVIATING";
        case VerificationLabel::incorrect_illogical: return "INCORRECT-ILLOGICAL";
        case VerificationLabel::incorrect_missing: return "INCORRECT-MISSING";
    }
    return "INCORRECT-MISSING";
}

VerificationLabel verification_label_from_string(const std::string& s) {
    for (auto label : all_verification_labels()) {
        if (s == to_string(label)) return label;
    }
    throw std::invalid_argument("unknown verification label '" + s + "'");
}

bool is_correct(VerificationLabel label) {
    switch (label) {
        case VerificationLabel::correct_explicit:
        case VerificationLabel::correct_implicit:
        case VerificationLabel::correct_additional:
        case VerificationLabel::correct_missing:
            return true;
        default:
            return false;
    }
}

// ---------------------------------------------------------------------------
// Segmentation
// ---------------------------------------------------------------------------

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closing(char c) { return c == ')' || c == ']' || c == '"' || c == '\''; }

/// Splits at terminal punctuation runs (plus trailing closers) followed by
/// whitespace or end of text, and at newline runs.
std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string current;
    std::size_t i = 0;
    auto flush = [&] {
        std::string t = trim(current);
        if (!t.empty()) sentences.push_back(std::move(t));
        current.clear();
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n' || c == '\r') {
            flush();
            ++i;
            continue;
        }
        if (is_terminal(c)) {
            std::size_t j = i;
            while (j < text.size() && is_terminal(text[j])) ++j;
            while (j < text.size() && is_closing(text[j])) ++j;
            if (j >= text.size() || std::isspace(static_cast<unsigned char>(text[j]))) {
                current.append(text, i, j - i);
                i = j;
                flush();
                continue;
            }
        }
        current.push_back(c);
        ++i;
    }
    flush();
    return sentences;
}

bool ci_word_at(const std::string& text, std::size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) return false;
    }
    // both sides must be word boundaries
    if (pos > 0 && std::isalnum(static_cast<unsigned char>(text[pos - 1]))) return false;
    const std::size_t end = pos + word.size();
    if (end < text.size() && std::isalnum(static_cast<unsigned char>(text[end]))) return false;
    return true;
}

/// Length of a clause-marker occurrence starting at pos, or 0. Markers are
/// frozen: because, therefore, however, which suggests.
std::size_t marker_length(const std::string& text, std::size_t pos) {
    for (std::string_view marker : {"because", "therefore", "however"}) {
        if (ci_word_at(text, pos, marker)) return marker.size();
    }
    if (ci_word_at(text, pos, "which")) {
        std::size_t j = pos + 5;
        std::size_t spaces = 0;
        while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) {
            ++j;
            ++spaces;
        }
        if (spaces > 0 && ci_word_at(text, j, "suggests")) return (j - pos) + 8;
    }
    return 0;
}

/// Length of an enumeration delimiter "(1)", "(a)", "(iv)" at pos, or 0.
std::size_t enum_length(const std::string& text, std::size_t pos) {
    if (text[pos] != '(') return 0;
    std::size_t j = pos + 1;
    std::string token;
    while (j < text.size() && std::isalnum(static_cast<unsigned char>(text[j])) && token.size() <= 4) {
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[j]))));
        ++j;
    }
    if (j >= text.size() || text[j] != ')' || token.empty() || token.size() > 4) return 0;
    const bool digits = std::all_of(token.begin(), token.end(),
                                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    const bool single_letter = token.size() == 1 && std::isalpha(static_cast<unsigned char>(token[0]));
    const bool roman = std::all_of(token.begin(), token.end(),
                                   [](char c) { return c == 'i' || c == 'v' || c == 'x'; });
    return (digits || single_letter || roman) ? j + 1 - pos : 0;
}

struct Fragment {
    std::string text;
    std::size_t sentence_index;
};

/// Splits one sentence at clause markers (kept, starting the next
/// fragment), semicolons (dropped) and enumeration delimiters (kept).
/// Adjacent boundaries collapse because empty fragments are discarded.
void clause_split(const std::string& sentence, std::size_t sentence_index,
                  std::vector<Fragment>& out) {
    std::string current;
    auto flush = [&] {
        std::string t = trim(current);
        if (!t.empty()) out.push_back({std::move(t), sentence_index});
        current.clear();
    };
    std::size_t i = 0;
    while (i < sentence.size()) {
        const char c = sentence[i];
        if (c == ';') {
            flush();
            ++i;
            continue;
        }
        if (marker_length(sentence, i) > 0) {
            flush();
            current.push_back(c);
            ++i;
            continue;
        }
        if (enum_length(sentence, i) > 0 && !trim(current).empty()) {
            flush();
            current.push_back(c);
            ++i;
            continue;
        }
        current.push_back(c);
        ++i;
    }
    flush();
}

const std::unordered_set<std::string>& merge_pronouns() {
    static const std::unordered_set<std::string> words = {"it",    "this",  "that", "they",
                                                          "these", "those", "which"};
    return words;
}

const std::unordered_set<std::string>& np_markers() {
    static const std::unordered_set<std::string> words = {"a", "an", "the", "its", "their", "his", "her"};
    return words;
}

/// A fragment merges into its predecessor when it is too short to stand
/// alone or is a pronoun-only continuation.
bool should_merge(const std::vector<std::string>& tokens) {
    if (tokens.size() < 3) return true;
    if (!merge_pronouns().count(tokens.front())) return false;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (np_markers().count(tokens[i])) return false;
    }
    return true;
}

}  // namespace

std::vector<AtomicStatement> segment(const std::string& rationale) {
    std::vector<Fragment> fragments;
    const auto sentences = split_sentences(rationale);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        clause_split(sentences[s], s, fragments);
    }

    std::vector<AtomicStatement> statements;
    for (auto& fragment : fragments) {
        const auto tokens = index::normalize_and_tokenize(fragment.text, false);
        if (tokens.empty()) continue;  // punctuation-only fragment
        if (!statements.empty() && should_merge(tokens)) {
            statements.back().text += " " + fragment.text;
        } else {
            statements.push_back({statements.size(), std::move(fragment.text), fragment.sentence_index});
        }
    }
    return statements;
}

// ---------------------------------------------------------------------------
// Judging
// ---------------------------------------------------------------------------

const std::string& judge_system_prompt() {
    static const std::string text =
        "You verify whether a statement taken from a model-written rationale is supported by "
        "the shown documents. Classify the statement into exactly one of the following "
        "categories:\n\n"
        "CORRECT-EXPLICIT: Information is explicitly stated in the documents (quoted or "
        "paraphrased).\n"
        "CORRECT-IMPLICIT: Facts are not stated verbatim but are logically inferred from "
        "context clues.\n"
        "CORRECT-ADDITIONAL: Uses context accurately but adds relevant, correct external "
        "details.\n"
        "CORRECT-MISSING: Conclusion is correct, but the cited documents provide no support "
        "(irrelevant).\n"
        "INCORRECT-FALSE: Statements directly contradict evidence provided in the context.\n"
        "INCORRECT-DEVIATING: Statements are off-topic or unrelated to the query/documents.\n"
        "INCORRECT-ILLOGICAL: Reasoning contains internal contradictions or violates "
        "logic/scientific principles.\n"
        "INCORRECT-MISSING: Reasoning is incorrect and the cited documents are irrelevant.\n\n"
        "Respond with exactly two lines:\n"
        "LABEL: <category>\n"
        "REASON: <one line>";
    return text;
}

namespace {

std::string one_line(const std::string& text) {
    std::string out = text;
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return trim(out);
}

struct ParsedJudgeOutput {
    VerificationLabel label;
    std::string reason;
};

std::optional<ParsedJudgeOutput> parse_judge_output(const std::string& raw) {
    std::optional<VerificationLabel> label;
    std::string reason;
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t end = raw.find('\n', start);
        if (end == std::string::npos) end = raw.size();
        std::string line = trim(std::string_view(raw).substr(start, end - start));
        start = end + 1;
        const std::string lowered = lower_ascii(line);
        if (!label && lowered.rfind("label:", 0) == 0) {
            std::string value = trim(std::string_view(line).substr(6));
            while (!value.empty() && (value.back() == '.' || value.back() == ',')) value.pop_back();
            std::string upper = value;
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            for (auto candidate : all_verification_labels()) {
                if (upper == to_string(candidate)) {
                    label = candidate;
                    break;
                }
            }
        } else if (reason.empty() && lowered.rfind("reason:", 0) == 0) {
            reason = trim(std::string_view(line).substr(7));
        }
        if (end == raw.size()) break;
    }
    if (!label) return std::nullopt;
    return ParsedJudgeOutput{*label, reason};
}

}  // namespace

std::string build_judge_prompt(const std::string& query, const EvidenceSet& evidence,
                               std::size_t context_j, const AtomicStatement& statement) {
    if (context_j == 0 || context_j > evidence.passages.size()) {
        throw std::invalid_argument("build_judge_prompt: context_j must be in 1..|evidence|");
    }
    std::string out = "Question: " + one_line(query);
    for (std::size_t i = 0; i < context_j; ++i) {
        out += "\nDocument [" + std::to_string(i + 1) + "] " + one_line(evidence.passages[i].text);
    }
    out += "\nStatement: " + one_line(statement.text);
    return out;
}

std::vector<StatementVerdict> verify_statements(clients::ChatClient& judge,
                                                const std::string& query,
                                                const EvidenceSet& evidence,
                                                std::size_t context_j,
                                                const std::vector<AtomicStatement>& statements) {
    if (statements.empty()) {
        throw std::invalid_argument("verify_statements: statements must be non-empty");
    }
    if (context_j == 0 || context_j > evidence.passages.size()) {
        throw std::invalid_argument("verify_statements: context_j must be in 1..|evidence|");
    }

    std::vector<StatementVerdict> verdicts;
    verdicts.reserve(statements.size());
    for (const auto& statement : statements) {
        clients::GenerationRequest request;
        request.model = judge.model();
        request.messages = {{"system", judge_system_prompt()},
                            {"user", build_judge_prompt(query, evidence, context_j, statement)}};

        StatementVerdict verdict;
        verdict.statement = statement;
        std::string raw;
        std::optional<ParsedJudgeOutput> parsed;
        for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
            raw = judge.generate(request);
            parsed = parse_judge_output(raw);
        }
        if (parsed) {
            verdict.label = parsed->label;
            verdict.judge_rationale = parsed->reason;
        } else {
            verdict.label = VerificationLabel::incorrect_missing;
            verdict.judge_rationale = trim(raw);
            verdict.invalid_output = true;
        }
        verdict.supported = is_correct(verdict.label);
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

double faithfulness(const std::vector<StatementVerdict>& verdicts) {
    if (verdicts.empty()) throw std::invalid_argument("faithfulness: undefined for n = 0");
    std::size_t supported = 0;
    for (const auto& v : verdicts) {
        if (v.supported) ++supported;
    }
    return static_cast<double>(supported) / static_cast<double>(verdicts.size());
}

bool overall_verdict(const std::vector<StatementVerdict>& verdicts) {
    if (verdicts.empty()) throw std::invalid_argument("overall_verdict: undefined for n = 0");
    for (const auto& v : verdicts) {
        if (v.label == VerificationLabel::incorrect_false) return false;
    }
    return faithfulness(verdicts) >= 0.5;
}

RationaleVerdict verify_rationale(clients::ChatClient& judge, const std::string& query,
                                  const EvidenceSet& evidence, std::size_t context_j,
                                  const std::string& rationale) {
    const auto statements = segment(rationale);
    if (statements.empty()) {
        throw std::invalid_argument("verify_rationale: rationale segments to no statements");
    }
    RationaleVerdict verdict;
    verdict.verdicts = verify_statements(judge, query, evidence, context_j, statements);
    verdict.faithfulness = faithfulness(verdict.verdicts);
    verdict.overall_correct = overall_verdict(verdict.verdicts);
    verdict.context_j = context_j;
    return verdict;
}

}  // namespace verirag::verification
