#include "verirag/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "verirag/jsonl.hpp"

namespace verirag::metrics {

namespace {

std::vector<std::string> eight_way_space() {
    std::vector<std::string> space;
    for (auto label : verification::all_verification_labels())
        space.push_back(verification::to_string(label));
    return space;
}

const std::vector<std::string>& binary_space() {
    static const std::vector<std::string> space = {"CORRECT", "INCORRECT"};
    return space;
}

std::string collapse_label(const std::string& label) {
    return label.substr(0, label.find('-'));
}

void require_aligned(const LabelVector& a, const LabelVector& b) {
    a.validate();
    b.validate();
    if (a.item_ids != b.item_ids) {
        throw std::invalid_argument("label vectors are not aligned on the same item ids");
    }
    if (a.space != b.space) {
        throw std::invalid_argument("label vectors use different label spaces");
    }
}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Label vectors
// ---------------------------------------------------------------------------

void LabelVector::validate() const {
    if (item_ids.empty()) throw std::invalid_argument("label vector is empty");
    if (item_ids.size() != labels.size()) {
        throw std::invalid_argument("label vector has " + std::to_string(item_ids.size()) +
                                    " item ids but " + std::to_string(labels.size()) + " labels");
    }
    for (const auto& label : labels) {
        if (std::find(space.begin(), space.end(), label) == space.end()) {
            throw std::invalid_argument("label '" + label + "' is outside the declared space");
        }
    }
}

LabelVector make_label_vector(std::string rater_id, std::vector<std::string> item_ids,
                              const std::vector<verification::VerificationLabel>& labels) {
    LabelVector v;
    v.rater_id = std::move(rater_id);
    v.item_ids = std::move(item_ids);
    for (auto label : labels) v.labels.push_back(verification::to_string(label));
    v.space = eight_way_space();
    v.validate();
    return v;
}

LabelVector collapse_binary(const LabelVector& v) {
    v.validate();
    LabelVector out;
    out.rater_id = v.rater_id;
    out.item_ids = v.item_ids;
    for (const auto& label : v.labels) out.labels.push_back(collapse_label(label));
    out.space = binary_space();
    return out;
}

LabelVector load_label_file(const std::string& path, std::string rater_id) {
    LabelVector v;
    v.rater_id = std::move(rater_id);
    bool saw_binary = false;
    bool saw_full = false;
    for_each_jsonl(path, [&](const nlohmann::json& record, std::size_t line) {
        if (!record.contains("item_id") || !record.contains("label")) {
            throw DataError(path, line, "label record needs item_id and label");
        }
        const auto label = record.at("label").get<std::string>();
        if (label == "CORRECT" || label == "INCORRECT") {
            saw_binary = true;
        } else {
            try {
                verification::verification_label_from_string(label);
            } catch (const std::invalid_argument&) {
                throw DataError(path, line, "unknown verification label '" + label + "'");
            }
            saw_full = true;
        }
        if (saw_binary && saw_full) {
            throw DataError(path, line, "file mixes collapsed and full taxonomy labels");
        }
        if (record.contains("rater")) v.rater_id = record.at("rater").get<std::string>();
        v.item_ids.push_back(record.at("item_id").get<std::string>());
        v.labels.push_back(label);
    });
    if (v.item_ids.empty()) throw DataError(path, 0, "label file has no records");
    std::set<std::string> unique_ids(v.item_ids.begin(), v.item_ids.end());
    if (unique_ids.size() != v.item_ids.size()) {
        throw DataError(path, 0, "label file repeats an item id");
    }

    // Sort by item id so independently-written files align.
    std::vector<std::size_t> order(v.item_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return v.item_ids[x] < v.item_ids[y]; });
    LabelVector sorted;
    sorted.rater_id = v.rater_id;
    for (std::size_t i : order) {
        sorted.item_ids.push_back(v.item_ids[i]);
        sorted.labels.push_back(v.labels[i]);
    }
    sorted.space = saw_full ? eight_way_space() : binary_space();
    sorted.validate();
    return sorted;
}

// ---------------------------------------------------------------------------
// Accuracy
// ---------------------------------------------------------------------------

double accuracy(const std::vector<AnswerLabel>& predictions,
                const std::vector<AnswerLabel>& golds) {
    if (predictions.size() != golds.size()) {
        throw std::invalid_argument("predictions and golds differ in length");
    }
    if (predictions.empty()) throw std::invalid_argument("accuracy over zero items");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] != AnswerLabel::abstain && predictions[i] == golds[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

// ---------------------------------------------------------------------------
// Cohen's kappa
// ---------------------------------------------------------------------------

std::string to_string(KappaBand band) {
    switch (band) {
        case KappaBand::below_chance: return "below_chance";
        case KappaBand::slight: return "slight";
        case KappaBand::fair: return "fair";
        case KappaBand::moderate: return "moderate";
        case KappaBand::substantial: return "substantial";
        case KappaBand::almost_perfect: return "almost_perfect";
    }
    return "slight";
}

KappaBand kappa_band(double kappa) {
    if (kappa < 0.0) return KappaBand::below_chance;
    if (kappa <= 0.20) return KappaBand::slight;
    if (kappa <= 0.40) return KappaBand::fair;
    if (kappa <= 0.60) return KappaBand::moderate;
    if (kappa <= 0.80) return KappaBand::substantial;
    return KappaBand::almost_perfect;
}

KappaResult cohens_kappa(const LabelVector& a, const LabelVector& b) {
    require_aligned(a, b);
    const auto n = static_cast<double>(a.labels.size());

    std::map<std::string, double> marg_a;
    std::map<std::string, double> marg_b;
    double agree = 0.0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        marg_a[a.labels[i]] += 1.0;
        marg_b[b.labels[i]] += 1.0;
        if (a.labels[i] == b.labels[i]) agree += 1.0;
    }

    KappaResult result;
    result.p_o = agree / n;
    for (const auto& [label, count_a] : marg_a) {
        const auto it = marg_b.find(label);
        if (it != marg_b.end()) result.p_e += (count_a / n) * (it->second / n);
    }

    if (result.p_e >= 1.0 - 1e-12) {
        result.degenerate = true;
        result.p_e = 1.0;
        result.kappa = result.p_o >= 1.0 ? 1.0 : 0.0;
    } else {
        result.kappa = (result.p_o - result.p_e) / (1.0 - result.p_e);
    }
    result.band = kappa_band(result.kappa);
    return result;
}

// ---------------------------------------------------------------------------
// Per-category precision / recall / F1
// ---------------------------------------------------------------------------

std::vector<CategoryF1> per_category_f1(const LabelVector& reference,
                                        const LabelVector& candidate) {
    require_aligned(reference, candidate);

    std::set<std::string> present(reference.labels.begin(), reference.labels.end());
    present.insert(candidate.labels.begin(), candidate.labels.end());

    std::vector<CategoryF1> out;
    for (const auto& category : reference.space) {
        if (!present.contains(category)) continue;
        std::size_t tp = 0, ref_count = 0, cand_count = 0;
        for (std::size_t i = 0; i < reference.labels.size(); ++i) {
            const bool in_ref = reference.labels[i] == category;
            const bool in_cand = candidate.labels[i] == category;
            ref_count += in_ref;
            cand_count += in_cand;
            tp += in_ref && in_cand;
        }
        CategoryF1 row;
        row.category = category;
        row.support = ref_count;
        row.precision = cand_count ? static_cast<double>(tp) / static_cast<double>(cand_count) : 0.0;
        row.recall = ref_count ? static_cast<double>(tp) / static_cast<double>(ref_count) : 0.0;
        row.f1 = (row.precision + row.recall) > 0.0
                     ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                     : 0.0;
        out.push_back(std::move(row));
    }
    return out;
}

double micro_f1(const LabelVector& reference, const LabelVector& candidate) {
    require_aligned(reference, candidate);
    // With exactly one label per item, micro TP = item-level agreements and
    // both micro precision and recall denominators equal n, so micro-F1
    // collapses to the raw agreement rate.
    std::size_t agree = 0;
    for (std::size_t i = 0; i < reference.labels.size(); ++i) {
        agree += reference.labels[i] == candidate.labels[i];
    }
    return static_cast<double>(agree) / static_cast<double>(reference.labels.size());
}

// ---------------------------------------------------------------------------
// Agreement reports
// ---------------------------------------------------------------------------

nlohmann::json agreement_to_json(const LabelVector& reference, const LabelVector& candidate) {
    const auto kappa = cohens_kappa(reference, candidate);
    const auto rows = per_category_f1(reference, candidate);
    const auto binary = cohens_kappa(collapse_binary(reference), collapse_binary(candidate));

    nlohmann::json per_category = nlohmann::json::array();
    for (const auto& row : rows) {
        per_category.push_back({{"category", row.category},
                                {"precision", row.precision},
                                {"recall", row.recall},
                                {"f1", row.f1},
                                {"support", row.support}});
    }
    return {
        {"reference", reference.rater_id},
        {"candidate", candidate.rater_id},
        {"items", reference.item_ids.size()},
        {"kappa",
         {{"value", kappa.kappa},
          {"p_o", kappa.p_o},
          {"p_e", kappa.p_e},
          {"band", to_string(kappa.band)},
          {"degenerate", kappa.degenerate}}},
        {"binary_kappa",
         {{"value", binary.kappa},
          {"p_o", binary.p_o},
          {"p_e", binary.p_e},
          {"band", to_string(binary.band)},
          {"degenerate", binary.degenerate}}},
        {"per_category", per_category},
        {"micro_f1", micro_f1(reference, candidate)},
    };
}

std::string render_agreement(const nlohmann::json& report) {
    std::string out;
    out += "Agreement: " + report.at("reference").get<std::string>() + " vs " +
           report.at("candidate").get<std::string>() + " (" +
           std::to_string(report.at("items").get<std::size_t>()) + " items)\n";
    const auto& kappa = report.at("kappa");
    out += "  kappa " + format_number(kappa.at("value").get<double>()) + " (" +
           kappa.at("band").get<std::string>() + "), p_o " +
           format_number(kappa.at("p_o").get<double>()) + ", p_e " +
           format_number(kappa.at("p_e").get<double>());
    if (kappa.at("degenerate").get<bool>()) out += ", degenerate";
    out += "\n";
    const auto& binary = report.at("binary_kappa");
    out += "  binary kappa " + format_number(binary.at("value").get<double>()) + " (" +
           binary.at("band").get<std::string>() + ")\n";
    out += "  micro-F1 " + format_number(report.at("micro_f1").get<double>()) + "\n";
    out += "  category                precision  recall     f1       support\n";
    for (const auto& row : report.at("per_category")) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-22s  %.4f     %.4f     %.4f   %zu\n",
                      row.at("category").get<std::string>().c_str(),
                      row.at("precision").get<double>(), row.at("recall").get<double>(),
                      row.at("f1").get<double>(), row.at("support").get<std::size_t>());
        out += line;
    }
    return out;
}

}  // namespace verirag::metrics
