// Python bindings for the core operations. Structured values cross the
// boundary as JSON strings; the package wrapper decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "verirag/harness.hpp"

namespace py = pybind11;
using namespace verirag;
using nlohmann::json;

namespace {

std::vector<index::Document> documents_from_json(const std::string& docs_json) {
    std::vector<index::Document> docs;
    for (const auto& j : json::parse(docs_json)) {
        index::Document doc;
        doc.doc_id = j.at("doc_id").get<std::string>();
        if (j.contains("external_id") && !j.at("external_id").is_null()) {
            doc.external_id = j.at("external_id").get<std::string>();
        }
        if (j.contains("title")) doc.title = j.at("title").get<std::string>();
        doc.body = j.at("body").get<std::string>();
        docs.push_back(std::move(doc));
    }
    return docs;
}

EvidenceSet evidence_from_texts(const std::vector<std::string>& passages) {
    EvidenceSet evidence;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        evidence.passages.push_back(
            {"p" + std::to_string(i), passages[i], 0.0, std::nullopt});
    }
    return evidence;
}

std::vector<verification::VerificationLabel> parse_labels(const std::vector<std::string>& raw) {
    std::vector<verification::VerificationLabel> labels;
    labels.reserve(raw.size());
    for (const auto& text : raw) labels.push_back(verification::verification_label_from_string(text));
    return labels;
}

/// Labels drawn entirely from {CORRECT, INCORRECT} form a collapsed vector;
/// anything else must parse as the full taxonomy.
metrics::LabelVector label_vector(const std::string& rater,
                                  const std::vector<std::string>& labels) {
    std::vector<std::string> items;
    for (std::size_t i = 0; i < labels.size(); ++i) items.push_back("i" + std::to_string(i));
    const bool binary = std::all_of(labels.begin(), labels.end(), [](const std::string& l) {
        return l == "CORRECT" || l == "INCORRECT";
    });
    if (binary) {
        return {rater, std::move(items), labels, {"CORRECT", "INCORRECT"}};
    }
    return metrics::make_label_vector(rater, std::move(items), parse_labels(labels));
}

std::vector<verification::StatementVerdict> verdicts_from_labels(
    const std::vector<std::string>& raw) {
    std::vector<verification::StatementVerdict> verdicts;
    for (const auto& label : parse_labels(raw)) {
        verification::StatementVerdict v;
        v.label = label;
        v.supported = verification::is_correct(label);
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

std::vector<AnswerLabel> answers_from_strings(const std::vector<std::string>& raw) {
    std::vector<AnswerLabel> labels;
    for (const auto& text : raw) labels.push_back(answer_label_from_string(text));
    return labels;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "retrieve-rerank-reason-verify core operations";

    m.def(
        "tokenize",
        [](const std::string& text, bool drop_stopwords) {
            return index::normalize_and_tokenize(text, drop_stopwords);
        },
        py::arg("text"), py::arg("drop_stopwords") = false);

    py::class_<index::Bm25Index>(m, "Bm25Index")
        .def_static(
            "build_json",
            [](const std::string& docs_json) {
                return index::Bm25Index::build(documents_from_json(docs_json));
            },
            py::arg("docs_json"))
        .def_static("load", &index::Bm25Index::load, py::arg("path"))
        .def("save", &index::Bm25Index::save, py::arg("path"))
        .def_property_readonly(
            "doc_count", [](const index::Bm25Index& self) { return self.stats().doc_count; })
        .def(
            "retrieve_json",
            [](const index::Bm25Index& self, const std::string& query, std::size_t k) {
                json out = json::array();
                for (const auto& p : self.retrieve(query, k)) {
                    out.push_back({{"doc_id", p.doc_id}, {"text", p.text},
                                   {"bm25_score", p.bm25_score}});
                }
                return out.dump();
            },
            py::arg("query"), py::arg("k") = 20);

    m.def(
        "overlap",
        [](const std::string& query, const std::vector<std::string>& passages) {
            return pipeline::overlap(query, evidence_from_texts(passages));
        },
        py::arg("query"), py::arg("passages"));

    m.def(
        "evidence_score",
        [](const std::vector<double>& rerank_scores) {
            EvidenceSet evidence;
            for (std::size_t i = 0; i < rerank_scores.size(); ++i) {
                evidence.passages.push_back({"p" + std::to_string(i), "", 0.0, rerank_scores[i]});
            }
            return pipeline::evidence_score(evidence);
        },
        py::arg("rerank_scores"));

    m.def(
        "should_rewrite",
        [](double s, double e, double tau_ovlp, double tau_evid) {
            pipeline::PipelineConfig cfg;
            cfg.tau_ovlp = tau_ovlp;
            cfg.tau_evid = tau_evid;
            return pipeline::should_rewrite(s, e, cfg);
        },
        py::arg("s"), py::arg("e"), py::arg("tau_ovlp") = 0.3, py::arg("tau_evid") = 0.5);

    m.def(
        "segment_json",
        [](const std::string& rationale) {
            json out = json::array();
            for (const auto& statement : verification::segment(rationale)) {
                out.push_back({{"index", statement.index},
                               {"text", statement.text},
                               {"sentence_index", statement.sentence_index}});
            }
            return out.dump();
        },
        py::arg("rationale"));

    m.def(
        "faithfulness",
        [](const std::vector<std::string>& labels) {
            return verification::faithfulness(verdicts_from_labels(labels));
        },
        py::arg("labels"));

    m.def(
        "overall_verdict",
        [](const std::vector<std::string>& labels) {
            return verification::overall_verdict(verdicts_from_labels(labels));
        },
        py::arg("labels"));

    m.def(
        "parse_final_answer_json",
        [](const std::string& raw, const std::string& dataset) {
            const auto parsed =
                rationale::parse_final_answer(raw, dataset_kind_from_string(dataset));
            return json{{"label", to_string(parsed.label)},
                        {"parse_ok", parsed.parse_ok},
                        {"letter_word_conflict", parsed.letter_word_conflict}}
                .dump();
        },
        py::arg("raw"), py::arg("dataset") = "bioasq");

    m.def("extract_rationale", &rationale::extract_rationale, py::arg("raw"));

    m.def(
        "accuracy",
        [](const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
            return metrics::accuracy(answers_from_strings(predicted), answers_from_strings(gold));
        },
        py::arg("predicted"), py::arg("gold"));

    m.def(
        "cohens_kappa_json",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
            const auto result =
                metrics::cohens_kappa(label_vector("a", a), label_vector("b", b));
            return json{{"kappa", result.kappa},
                        {"p_o", result.p_o},
                        {"p_e", result.p_e},
                        {"band", metrics::to_string(result.band)},
                        {"degenerate", result.degenerate}}
                .dump();
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "per_category_f1_json",
        [](const std::vector<std::string>& reference, const std::vector<std::string>& candidate) {
            json out = json::array();
            for (const auto& row : metrics::per_category_f1(label_vector("reference", reference),
                                                            label_vector("candidate", candidate))) {
                out.push_back({{"category", row.category},
                               {"precision", row.precision},
                               {"recall", row.recall},
                               {"f1", row.f1},
                               {"support", row.support}});
            }
            return out.dump();
        },
        py::arg("reference"), py::arg("candidate"));

    m.def(
        "micro_f1",
        [](const std::vector<std::string>& reference, const std::vector<std::string>& candidate) {
            return metrics::micro_f1(label_vector("reference", reference),
                                     label_vector("candidate", candidate));
        },
        py::arg("reference"), py::arg("candidate"));

    m.def(
        "answer_query_json",
        [](const std::string& question, const std::string& docs_json, const std::string& dataset,
           std::size_t k, std::size_t m_passages, bool rerank, std::uint64_t seed) {
            const auto corpus = index::Bm25Index::build(documents_from_json(docs_json));
            clients::SyntheticChatClient generator(seed), rewriter(seed + 1), judge(seed + 2);
            clients::HashEmbedClient embedder(64, seed);
            clients::SyntheticRerankClient reranker;
            pipeline::PipelineConfig cfg;
            cfg.k = k;
            cfg.m = m_passages;
            cfg.dataset_kind = dataset_kind_from_string(dataset);
            cfg.rerank = rerank;
            cfg.seed = seed;
            const pipeline::PipelineClients model_clients{generator, rewriter, judge, embedder,
                                                          reranker};
            const auto trace =
                pipeline::answer_query(question, corpus, model_clients, nullptr, cfg);
            return pipeline::trace_to_json(trace).dump();
        },
        py::arg("question"), py::arg("docs_json"), py::arg("dataset") = "bioasq",
        py::arg("k") = 20, py::arg("m") = 5, py::arg("rerank") = true, py::arg("seed") = 7);
}
