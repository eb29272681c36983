#include "verirag/corpus_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "verirag/jsonl.hpp"

namespace verirag::index {

using json = nlohmann::json;

namespace {

/// Folds a Latin-1 / Latin-Extended-A code point to its lowercase ASCII
/// base letters. Returns false for code points with no mapping; those act
/// as token separators.
bool fold_codepoint(std::uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        unsigned char c = static_cast<unsigned char>(cp);
        if (std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
            return true;
        }
        return false;
    }
    static const std::unordered_map<std::uint32_t, const char*> table = {
        // Latin-1 supplement
        {0xC0, "a"}, {0xC1, "a"}, {0xC2, "a"}, {0xC3, "a"}, {0xC4, "a"}, {0xC5, "a"},
        {0xC6, "ae"}, {0xC7, "c"},
        {0xC8, "e"}, {0xC9, "e"}, {0xCA, "e"}, {0xCB, "e"},
        {0xCC, "i"}, {0xCD, "i"}, {0xCE, "i"}, {0xCF, "i"},
        {0xD0, "d"}, {0xD1, "n"},
        {0xD2, "o"}, {0xD3, "o"}, {0xD4, "o"}, {0xD5, "o"}, {0xD6, "o"}, {0xD8, "o"},
        {0xD9, "u"}, {0xDA, "u"}, {0xDB, "u"}, {0xDC, "u"},
        {0xDD, "y"}, {0xDE, "th"}, {0xDF, "ss"},
        {0xE0, "a"}, {0xE1, "a"}, {0xE2, "a"}, {0xE3, "a"}, {0xE4, "a"}, {0xE5, "a"},
        {0xE6, "ae"}, {0xE7, "c"},
        {0xE8, "e"}, {0xE9, "e"}, {0xEA, "e"}, {0xEB, "e"},
        {0xEC, "i"}, {0xED, "i"}, {0xEE, "i"}, {0xEF, "i"},
        {0xF0, "d"}, {0xF1, "n"},
        {0xF2, "o"}, {0xF3, "o"}, {0xF4, "o"}, {0xF5, "o"}, {0xF6, "o"}, {0xF8, "o"},
        {0xF9, "u"}, {0xFA, "u"}, {0xFB, "u"}, {0xFC, "u"},
        {0xFD, "y"}, {0xFE, "th"}, {0xFF, "y"},
        // Latin extended-A (common pairs)
        {0x100, "a"}, {0x101, "a"}, {0x102, "a"}, {0x103, "a"}, {0x104, "a"}, {0x105, "a"},
        {0x106, "c"}, {0x107, "c"}, {0x108, "c"}, {0x109, "c"}, {0x10A, "c"}, {0x10B, "c"},
        {0x10C, "c"}, {0x10D, "c"}, {0x10E, "d"}, {0x10F, "d"}, {0x110, "d"}, {0x111, "d"},
        {0x112, "e"}, {0x113, "e"}, {0x114, "e"}, {0x115, "e"}, {0x116, "e"}, {0x117, "e"},
        {0x118, "e"}, {0x119, "e"}, {0x11A, "e"}, {0x11B, "e"},
        {0x11C, "g"}, {0x11D, "g"}, {0x11E, "g"}, {0x11F, "g"}, {0x120, "g"}, {0x121, "g"},
        {0x122, "g"}, {0x123, "g"}, {0x124, "h"}, {0x125, "h"}, {0x126, "h"}, {0x127, "h"},
        {0x128, "i"}, {0x129, "i"}, {0x12A, "i"}, {0x12B, "i"}, {0x12C, "i"}, {0x12D, "i"},
        {0x12E, "i"}, {0x12F, "i"}, {0x130, "i"}, {0x131, "i"},
        {0x134, "j"}, {0x135, "j"}, {0x136, "k"}, {0x137, "k"},
        {0x139, "l"}, {0x13A, "l"}, {0x13B, "l"}, {0x13C, "l"}, {0x13D, "l"}, {0x13E, "l"},
        {0x13F, "l"}, {0x140, "l"}, {0x141, "l"}, {0x142, "l"},
        {0x143, "n"}, {0x144, "n"}, {0x145, "n"}, {0x146, "n"}, {0x147, "n"}, {0x148, "n"},
        {0x14C, "o"}, {0x14D, "o"}, {0x14E, "o"}, {0x14F, "o"}, {0x150, "o"}, {0x151, "o"},
        {0x152, "oe"}, {0x153, "oe"},
        {0x154, "r"}, {0x155, "r"}, {0x156, "r"}, {0x157, "r"}, {0x158, "r"}, {0x159, "r"},
        {0x15A, "s"}, {0x15B, "s"}, {0x15C, "s"}, {0x15D, "s"}, {0x15E, "s"}, {0x15F, "s"},
        {0x160, "s"}, {0x161, "s"},
        {0x162, "t"}, {0x163, "t"}, {0x164, "t"}, {0x165, "t"}, {0x166, "t"}, {0x167, "t"},
        {0x168, "u"}, {0x169, "u"}, {0x16A, "u"}, {0x16B, "u"}, {0x16C, "u"}, {0x16D, "u"},
        {0x16E, "u"}, {0x16F, "u"}, {0x170, "u"}, {0x171, "u"}, {0x172, "u"}, {0x173, "u"},
        {0x174, "w"}, {0x175, "w"}, {0x176, "y"}, {0x177, "y"}, {0x178, "y"},
        {0x179, "z"}, {0x17A, "z"}, {0x17B, "z"}, {0x17C, "z"}, {0x17D, "z"}, {0x17E, "z"},
    };
    auto it = table.find(cp);
    if (it == table.end()) return false;
    out += it->second;
    return true;
}

/// Decodes one UTF-8 code point starting at `i`; advances `i` past it.
/// Malformed bytes decode as a single-byte non-mappable code point.
std::uint32_t next_codepoint(std::string_view text, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        cp = c & 0x1F;
        extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
        cp = c & 0x0F;
        extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
        cp = c & 0x07;
        extra = 3;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + extra >= text.size()) {
        ++i;
        return 0xFFFD;
    }
    for (std::size_t j = 1; j <= extra; ++j) {
        unsigned char cc = static_cast<unsigned char>(text[i + j]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += extra + 1;
    return cp;
}

}  // namespace

std::vector<std::string> normalize_and_tokenize(std::string_view text,
                                                const StopwordSet& stopwords,
                                                bool drop_stopwords) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (!drop_stopwords || stopwords.find(current) == stopwords.end()) {
            tokens.push_back(current);
        }
        current.clear();
    };
    std::size_t i = 0;
    while (i < text.size()) {
        std::uint32_t cp = next_codepoint(text, i);
        if (!fold_codepoint(cp, current)) flush();  // separator
    }
    flush();
    return tokens;
}

std::vector<std::string> normalize_and_tokenize(std::string_view text, bool drop_stopwords) {
    return normalize_and_tokenize(text, english_stopwords(), drop_stopwords);
}

std::string document_text(const Document& doc) {
    if (doc.title.empty()) return doc.body;
    if (doc.body.empty()) return doc.title;
    return doc.title + " " + doc.body;
}

Bm25Index Bm25Index::build(std::vector<Document> docs, Bm25Params params) {
    Bm25Index index;
    index.params_ = params;
    index.docs_ = std::move(docs);
    index.doc_tokens_.reserve(index.docs_.size());

    std::size_t total_tokens = 0;
    for (std::size_t ordinal = 0; ordinal < index.docs_.size(); ++ordinal) {
        const Document& doc = index.docs_[ordinal];
        if (!index.ordinal_by_id_.emplace(doc.doc_id, ordinal).second) {
            throw DataError("duplicate doc_id '" + doc.doc_id + "'");
        }
        auto tokens = normalize_and_tokenize(document_text(doc), false);
        index.doc_tokens_.push_back(tokens.size());
        index.stats_.doc_len[doc.doc_id] = tokens.size();
        total_tokens += tokens.size();

        std::unordered_map<std::string, std::size_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, freq] : tf) {
            index.postings_[term].push_back({ordinal, freq});
            ++index.stats_.doc_freq[term];
        }
    }
    index.stats_.doc_count = index.docs_.size();
    index.stats_.avg_doc_len =
        index.docs_.empty() ? 0.0 : static_cast<double>(total_tokens) / static_cast<double>(index.docs_.size());
    return index;
}

std::vector<ScoredPassage> Bm25Index::retrieve(const std::string& query, std::size_t k) const {
    if (k == 0) throw std::invalid_argument("bm25_retrieve: k must be >= 1");
    std::vector<double> scores(docs_.size(), 0.0);
    std::vector<bool> matched(docs_.size(), false);

    const double n_docs = static_cast<double>(stats_.doc_count);
    const double avg_len = stats_.avg_doc_len;
    // Stopwords are retained: IDF already downweights them.
    for (const auto& term : normalize_and_tokenize(query, false)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
        for (const Posting& p : it->second) {
            const double tf = static_cast<double>(p.term_freq);
            const double norm =
                avg_len > 0.0 ? static_cast<double>(doc_tokens_[p.doc_ordinal]) / avg_len : 1.0;
            scores[p.doc_ordinal] +=
                idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * (1.0 - params_.b + params_.b * norm));
            matched[p.doc_ordinal] = true;
        }
    }

    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (matched[i]) hits.push_back(i);
    }
    std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return docs_[a].doc_id < docs_[b].doc_id;
    });
    if (hits.size() > k) hits.resize(k);

    std::vector<ScoredPassage> out;
    out.reserve(hits.size());
    for (std::size_t i : hits) {
        out.push_back({docs_[i].doc_id, document_text(docs_[i]), scores[i], std::nullopt});
    }
    return out;
}

const Document* Bm25Index::find(const std::string& doc_id) const {
    auto it = ordinal_by_id_.find(doc_id);
    return it == ordinal_by_id_.end() ? nullptr : &docs_[it->second];
}

namespace {
constexpr const char* kIndexFormat = "verirag.index";
constexpr int kIndexVersion = 1;

json document_to_json(const Document& doc) {
    json j;
    j["doc_id"] = doc.doc_id;
    j["external_id"] = doc.external_id ? json(*doc.external_id) : json(nullptr);
    j["title"] = doc.title;
    j["body"] = doc.body;
    return j;
}

Document document_from_json(const json& j, const std::string& path, std::size_t line) {
    for (const char* field : {"doc_id", "title", "body"}) {
        if (!j.contains(field)) throw DataError(path, line, std::string("missing field '") + field + "'");
    }
    Document doc;
    doc.doc_id = j.at("doc_id").get<std::string>();
    if (j.contains("external_id") && !j.at("external_id").is_null()) {
        doc.external_id = j.at("external_id").get<std::string>();
    }
    doc.title = j.at("title").get<std::string>();
    doc.body = j.at("body").get<std::string>();
    return doc;
}
}  // namespace

void Bm25Index::save(const std::string& path) const {
    json j;
    j["format"] = kIndexFormat;
    j["version"] = kIndexVersion;
    j["params"] = {{"k1", params_.k1}, {"b", params_.b}};
    json docs = json::array();
    for (const auto& doc : docs_) docs.push_back(document_to_json(doc));
    j["documents"] = std::move(docs);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path, 0, "cannot open for writing");
    out << j.dump(2) << "\n";
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path, 0, "cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path, 0, std::string("invalid index file: ") + e.what());
    }
    if (j.value("format", "") != kIndexFormat) throw DataError(path, 0, "not an index file");
    if (j.value("version", 0) != kIndexVersion) {
        throw DataError(path, 0, "unsupported index version " + std::to_string(j.value("version", 0)));
    }
    Bm25Params params;
    params.k1 = j.at("params").value("k1", 1.2);
    params.b = j.at("params").value("b", 0.75);
    std::vector<Document> docs;
    for (const auto& dj : j.at("documents")) {
        docs.push_back(document_from_json(dj, path, 0));
    }
    return build(std::move(docs), params);
}

std::vector<Document> load_corpus_jsonl(const std::string& path) {
    std::vector<Document> docs;
    for_each_jsonl(path, [&](const json& j, std::size_t line) {
        Document doc = document_from_json(j, path, line);
        if (normalize_and_tokenize(doc.body, false).empty()) {
            throw DataError(path, line, "document '" + doc.doc_id + "' has an empty body after normalization");
        }
        docs.push_back(std::move(doc));
    });
    return docs;
}

void save_corpus_jsonl(const std::string& path, const std::vector<Document>& docs) {
    std::vector<json> lines;
    lines.reserve(docs.size());
    for (const auto& doc : docs) lines.push_back(document_to_json(doc));
    write_jsonl(path, lines);
}

}  // namespace verirag::index
