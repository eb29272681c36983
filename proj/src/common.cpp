#include "verirag/common.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace verirag {

std::string to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::bioasq: return "bioasq";
        case DatasetKind::pubmedqa: return "pubmedqa";
    }
    return "bioasq";
}

std::string to_string(AnswerLabel label) {
    switch (label) {
        case AnswerLabel::yes: return "yes";
        case AnswerLabel::no: return "no";
        case AnswerLabel::maybe: return "maybe";
        case AnswerLabel::abstain: return "abstain";
    }
    return "abstain";
}

std::string to_string(SelectionPolicy policy) {
    switch (policy) {
        case SelectionPolicy::similarity_only: return "similarity_only";
        case SelectionPolicy::label_balanced: return "label_balanced";
        case SelectionPolicy::static_pool: return "static";
    }
    return "similarity_only";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "bioasq") return DatasetKind::bioasq;
    if (s == "pubmedqa") return DatasetKind::pubmedqa;
    throw std::invalid_argument("unknown dataset kind '" + s + "'");
}

AnswerLabel answer_label_from_string(const std::string& s) {
    if (s == "yes") return AnswerLabel::yes;
    if (s == "no") return AnswerLabel::no;
    if (s == "maybe") return AnswerLabel::maybe;
    if (s == "abstain") return AnswerLabel::abstain;
    throw std::invalid_argument("unknown answer label '" + s + "'");
}

SelectionPolicy selection_policy_from_string(const std::string& s) {
    if (s == "similarity_only") return SelectionPolicy::similarity_only;
    if (s == "label_balanced") return SelectionPolicy::label_balanced;
    if (s == "static") return SelectionPolicy::static_pool;
    throw std::invalid_argument("unknown selection policy '" + s + "'");
}

std::vector<AnswerLabel> label_space(DatasetKind kind) {
    if (kind == DatasetKind::bioasq) {
        return {AnswerLabel::yes, AnswerLabel::no};
    }
    return {AnswerLabel::yes, AnswerLabel::no, AnswerLabel::maybe};
}

std::string to_string(ClientErrorKind kind) {
    switch (kind) {
        case ClientErrorKind::transport: return "transport";
        case ClientErrorKind::protocol: return "protocol";
        case ClientErrorKind::rate_limited: return "rate_limited";
        case ClientErrorKind::invalid_response: return "invalid_response";
    }
    return "protocol";
}

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded_uniform: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace verirag
