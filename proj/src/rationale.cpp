#include "verirag/rationale.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

namespace verirag::rationale {

namespace {

/// Collapses newlines so multi-line passage or rationale text renders as a
/// single prompt line.
std::string one_line(const std::string& text) {
    std::string out = text;
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return trim(out);
}

std::string numbered_documents(const std::vector<index::ScoredPassage>& passages) {
    std::string out;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (!out.empty()) out += '\n';
        out += "Document [" + std::to_string(i + 1) + "] " + one_line(passages[i].text);
    }
    return out;
}

std::size_t whitespace_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::size_t n = 0;
    while (in >> tok) ++n;
    return n;
}

}  // namespace

const std::string& base_instruction() {
    static const std::string text =
        "Analyze the provided documents and answer the question. Briefly explain how the "
        "documents support your answer. If the documents are not useful, answer from your own "
        "knowledge without referencing them.";
    return text;
}

const std::string& bioasq_suffix() {
    static const std::string text =
        "Provide a precise factual answer grounded in the documents. Extract relevant "
        "statements and justify the decision based strictly on presented facts.\n\n"
        "OUTPUT FORMAT REQUIREMENT:\n"
        "End your response with one of the following on a new line:\n"
        "\"FINAL ANSWER: A. yes\"\n"
        "\"FINAL ANSWER: B. no\"\n\n"
        "If no document supports an answer, output: \"ANSWER UNAVAILABLE\"";
    return text;
}

const std::string& pubmedqa_suffix() {
    static const std::string text =
        "Critically evaluate the medical evidence in the documents (methods, sample sizes, "
        "statistical significance). Weigh supporting and opposing evidence, note limitations, "
        "and provide concise reasoning followed by a final judgment.\n\n"
        "OUTPUT FORMAT REQUIREMENT:\n"
        "End your response with exactly one of the following on a new line:\n"
        "\"FINAL ANSWER: A. yes\"\n"
        "\"FINAL ANSWER: B. no\"\n"
        "\"FINAL ANSWER: C. maybe\"\n\n"
        "If no document supports an answer, output: \"ANSWER UNAVAILABLE\"";
    return text;
}

const std::string& rewrite_system_prompt() {
    static const std::string text =
        "You clarify biomedical questions for literature retrieval. Expand acronyms and "
        "abbreviations, add precise medical terminology, and preserve the original intent. "
        "Return only the rewritten question.";
    return text;
}

std::string system_instruction(DatasetKind kind) {
    return base_instruction() + "\n\n" +
           (kind == DatasetKind::bioasq ? bioasq_suffix() : pubmedqa_suffix());
}

std::string answer_line(AnswerLabel label) {
    switch (label) {
        case AnswerLabel::yes: return "FINAL ANSWER: A. yes";
        case AnswerLabel::no: return "FINAL ANSWER: B. no";
        case AnswerLabel::maybe: return "FINAL ANSWER: C. maybe";
        case AnswerLabel::abstain: return "ANSWER UNAVAILABLE";
    }
    return "ANSWER UNAVAILABLE";
}

std::string render_demo_block(const demos::Demonstration& demo) {
    std::string block = numbered_documents(demo.evidence);
    if (!block.empty()) block += '\n';
    block += "Question: " + one_line(demo.question) + '\n';
    block += "Answer: " + one_line(demo.rationale) + '\n';
    block += answer_line(demo.label);
    return block;
}

std::string AssembledPrompt::user_message() const {
    std::string out;
    for (const auto& block : demo_blocks) {
        out += block;
        out += "\n\n";
    }
    out += evidence_block;
    out += "\n\nQuestion: " + question + "\nAnswer:";
    return out;
}

clients::GenerationRequest AssembledPrompt::to_request(const std::string& model) const {
    clients::GenerationRequest req;
    req.model = model;
    req.messages = {{"system", system}, {"user", user_message()}};
    return req;
}

AssembledPrompt build_prompt(const std::string& query, const EvidenceSet& evidence,
                             const std::vector<demos::Demonstration>& demonstrations,
                             DatasetKind kind) {
    if (evidence.passages.empty()) {
        throw std::invalid_argument("build_prompt: evidence must be non-empty");
    }
    AssembledPrompt prompt;
    prompt.system = system_instruction(kind);
    prompt.demo_blocks.reserve(demonstrations.size());
    for (const auto& demo : demonstrations) prompt.demo_blocks.push_back(render_demo_block(demo));
    prompt.evidence_block = numbered_documents(evidence.passages);
    prompt.question = one_line(query);
    prompt.token_estimate = whitespace_tokens(prompt.system) + whitespace_tokens(prompt.user_message());
    return prompt;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

bool imatch_at(const std::string& text, std::size_t pos, std::string_view pattern) {
    if (pos + pattern.size() > text.size()) return false;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) !=
            std::tolower(static_cast<unsigned char>(pattern[i]))) {
            return false;
        }
    }
    return true;
}

std::size_t last_ci_occurrence(const std::string& text, std::string_view pattern) {
    std::size_t last = std::string::npos;
    for (std::size_t i = 0; i + pattern.size() <= text.size(); ++i) {
        if (imatch_at(text, i, pattern)) last = i;
    }
    return last;
}

std::optional<AnswerLabel> word_label(const std::string& word) {
    if (word == "yes") return AnswerLabel::yes;
    if (word == "no") return AnswerLabel::no;
    if (word == "maybe") return AnswerLabel::maybe;
    return std::nullopt;
}

std::optional<AnswerLabel> letter_label(char letter) {
    switch (letter) {
        case 'a': return AnswerLabel::yes;
        case 'b': return AnswerLabel::no;
        case 'c': return AnswerLabel::maybe;
        default: return std::nullopt;
    }
}

struct AnswerMatch {
    std::size_t pos = 0;
    AnswerLabel label = AnswerLabel::abstain;
    bool conflict = false;
};

/// Parses the text after one "FINAL ANSWER" occurrence. Letter (A/B/C) and
/// word (yes/no/maybe) are both read; the word governs on conflict. Labels
/// outside the dataset's space do not count as matches.
std::optional<AnswerMatch> parse_after(const std::string& raw, std::size_t phrase_pos,
                                       std::size_t after, DatasetKind kind) {
    std::size_t i = after;
    auto skip_soft = [&] {
        while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) ++i;
    };
    skip_soft();
    if (i < raw.size() && raw[i] == ':') ++i;
    skip_soft();

    std::optional<AnswerLabel> letter;
    if (i < raw.size()) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
        const bool next_breaks = i + 1 >= raw.size() ||
                                 !std::isalnum(static_cast<unsigned char>(raw[i + 1]));
        if ((c == 'a' || c == 'b' || c == 'c') && next_breaks) {
            letter = letter_label(c);
            ++i;
            if (i < raw.size() && (raw[i] == '.' || raw[i] == ')')) ++i;
            skip_soft();
        }
    }

    std::string word;
    while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i])) && word.size() < 8) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
        ++i;
    }
    const std::optional<AnswerLabel> worded = word_label(word);

    AnswerMatch match;
    match.pos = phrase_pos;
    if (worded) {
        match.label = *worded;
        match.conflict = letter.has_value() && *letter != *worded;
    } else if (letter) {
        match.label = *letter;
    } else {
        return std::nullopt;
    }

    const auto space = label_space(kind);
    if (std::find(space.begin(), space.end(), match.label) == space.end()) return std::nullopt;
    return match;
}

std::optional<AnswerMatch> last_answer_match(const std::string& raw, DatasetKind kind) {
    constexpr std::string_view phrase = "final answer";
    std::optional<AnswerMatch> last;
    for (std::size_t i = 0; i + phrase.size() <= raw.size(); ++i) {
        if (!imatch_at(raw, i, phrase)) continue;
        if (auto match = parse_after(raw, i, i + phrase.size(), kind)) last = match;
    }
    return last;
}

}  // namespace

ParsedAnswer parse_final_answer(const std::string& raw, DatasetKind kind) {
    const auto match = last_answer_match(raw, kind);
    const std::size_t unavailable = last_ci_occurrence(raw, "answer unavailable");

    ParsedAnswer parsed;
    if (match && (unavailable == std::string::npos || match->pos > unavailable)) {
        parsed.label = match->label;
        parsed.parse_ok = true;
        parsed.letter_word_conflict = match->conflict;
    } else if (unavailable != std::string::npos) {
        parsed.label = AnswerLabel::abstain;
        parsed.parse_ok = true;
    }
    return parsed;
}

std::string extract_rationale(const std::string& raw) {
    // PubMedQA's label space is a superset of BioASQ's, so it finds every
    // answer line the parser can recognize.
    const auto match = last_answer_match(raw, DatasetKind::pubmedqa);
    const std::size_t unavailable = last_ci_occurrence(raw, "answer unavailable");
    if (match && (unavailable == std::string::npos || match->pos > unavailable)) {
        return trim(std::string_view(raw).substr(0, match->pos));
    }
    return trim(raw);
}

GenerationOutcome parse_generation(const std::string& raw, DatasetKind kind) {
    GenerationOutcome outcome;
    outcome.raw = raw;
    const auto parsed = parse_final_answer(raw, kind);
    outcome.answer = parsed.label;
    outcome.parse_ok = parsed.parse_ok;
    outcome.letter_word_conflict = parsed.letter_word_conflict;
    outcome.rationale = extract_rationale(raw);
    outcome.empty_rationale = outcome.rationale.empty();
    return outcome;
}

}  // namespace verirag::rationale
