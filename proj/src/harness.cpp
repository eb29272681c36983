#include "verirag/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "verirag/jsonl.hpp"

namespace verirag::harness {

namespace {

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

/// Strict-parse helper: every key in `j` must be declared.
void expect_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                 const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw DataError("unknown key '" + key + "' in " + context);
        }
    }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::string normalization_to_string(clients::ScoreNormalization n) {
    switch (n) {
        case clients::ScoreNormalization::automatic: return "automatic";
        case clients::ScoreNormalization::logistic: return "logistic";
        case clients::ScoreNormalization::none: return "none";
    }
    return "automatic";
}

clients::ScoreNormalization normalization_from_string(const std::string& s) {
    if (s == "automatic") return clients::ScoreNormalization::automatic;
    if (s == "logistic") return clients::ScoreNormalization::logistic;
    if (s == "none") return clients::ScoreNormalization::none;
    throw DataError("unknown score normalization '" + s + "'");
}

nlohmann::json client_spec_to_json(const ClientSpec& spec) {
    return {
        {"backend", spec.backend},
        {"model", spec.model},
        {"seed", spec.seed},
        {"dim", spec.dim},
        {"script_path", spec.script_path},
        {"http",
         {{"endpoint", spec.http.endpoint},
          {"path", spec.http.path},
          {"model", spec.http.model},
          {"api_key_env", spec.http.api_key_env},
          {"timeout_ms", spec.http.timeout_ms},
          {"max_attempts", spec.http.retry.max_attempts},
          {"backoff_ms", spec.http.retry.backoff_ms},
          {"min_request_interval_ms", spec.http.min_request_interval_ms},
          {"normalization", normalization_to_string(spec.http.normalization)}}},
    };
}

ClientSpec client_spec_from_json(const nlohmann::json& j, const std::string& context) {
    expect_keys(j, {"backend", "model", "seed", "dim", "script_path", "http"}, context);
    ClientSpec spec;
    read_field(j, "backend", spec.backend);
    read_field(j, "model", spec.model);
    read_field(j, "seed", spec.seed);
    read_field(j, "dim", spec.dim);
    read_field(j, "script_path", spec.script_path);
    if (j.contains("http")) {
        const auto& h = j.at("http");
        expect_keys(h,
                    {"endpoint", "path", "model", "api_key_env", "timeout_ms", "max_attempts",
                     "backoff_ms", "min_request_interval_ms", "normalization"},
                    context + ".http");
        read_field(h, "endpoint", spec.http.endpoint);
        read_field(h, "path", spec.http.path);
        read_field(h, "model", spec.http.model);
        read_field(h, "api_key_env", spec.http.api_key_env);
        read_field(h, "timeout_ms", spec.http.timeout_ms);
        read_field(h, "max_attempts", spec.http.retry.max_attempts);
        read_field(h, "backoff_ms", spec.http.retry.backoff_ms);
        read_field(h, "min_request_interval_ms", spec.http.min_request_interval_ms);
        if (h.contains("normalization")) {
            spec.http.normalization =
                normalization_from_string(h.at("normalization").get<std::string>());
        }
    }
    return spec;
}

std::unique_ptr<clients::ChatClient> make_chat(const ClientSpec& spec, const std::string& role) {
    if (spec.backend == "synthetic") {
        return std::make_unique<clients::SyntheticChatClient>(spec.seed, spec.model);
    }
    if (spec.backend == "scripted") {
        if (spec.script_path.empty()) {
            throw DataError(role + ": scripted backend needs script_path");
        }
        return std::make_unique<clients::ScriptedChatClient>(
            clients::ScriptedChatClient::from_jsonl(spec.script_path, spec.model));
    }
    if (spec.backend == "http") {
        auto http = spec.http;
        if (http.model.empty()) http.model = spec.model;
        return clients::make_http_chat_client(std::move(http));
    }
    throw DataError(role + ": unknown chat backend '" + spec.backend + "'");
}

std::unique_ptr<clients::EmbedClient> make_embed(const ClientSpec& spec) {
    if (spec.backend == "synthetic") {
        return std::make_unique<clients::HashEmbedClient>(spec.dim, spec.seed);
    }
    if (spec.backend == "http") {
        auto http = spec.http;
        if (http.model.empty()) http.model = spec.model;
        return clients::make_http_embed_client(std::move(http));
    }
    throw DataError("embedder: unknown backend '" + spec.backend +
                    "' (synthetic embeddings are hash-based; there is no script format)");
}

std::unique_ptr<clients::RerankClient> make_rerank(const ClientSpec& spec) {
    if (spec.backend == "synthetic") {
        return std::make_unique<clients::SyntheticRerankClient>();
    }
    if (spec.backend == "scripted") {
        if (spec.script_path.empty()) {
            throw DataError("reranker: scripted backend needs script_path");
        }
        auto client = std::make_unique<clients::ScriptedRerankClient>(
            clients::ScriptedRerankClient::from_jsonl(spec.script_path));
        client->set_fallback_lexical(true);
        return client;
    }
    if (spec.backend == "http") {
        auto http = spec.http;
        if (http.model.empty()) http.model = spec.model;
        return clients::make_http_rerank_client(std::move(http));
    }
    throw DataError("reranker: unknown backend '" + spec.backend + "'");
}

pipeline::PipelineTrace error_trace(const DatasetRecord& record, const std::string& detail) {
    pipeline::PipelineTrace trace;
    trace.query_id = record.id;
    trace.original_query = record.question;
    trace.error = true;
    trace.error_detail = detail;
    return trace;
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "test";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "dev") return Split::dev;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + s + "'");
}

std::vector<DatasetRecord> load_dataset(const std::string& path, DatasetKind kind) {
    const auto space = label_space(kind);
    std::vector<DatasetRecord> records;
    std::set<std::string> seen_ids;

    for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
        for (const char* key : {"id", "question", "gold", "split"}) {
            if (!j.contains(key)) {
                throw DataError(path, line, std::string("record is missing '") + key + "'");
            }
        }
        DatasetRecord record;
        record.id = j.at("id").get<std::string>();
        record.question = j.at("question").get<std::string>();
        if (!seen_ids.insert(record.id).second) {
            throw DataError(path, line, "duplicate record id '" + record.id + "'");
        }

        const auto gold = j.at("gold").get<std::string>();
        try {
            record.gold = answer_label_from_string(gold);
        } catch (const std::invalid_argument&) {
            throw DataError(path, line, "unknown gold label '" + gold + "'");
        }
        if (std::find(space.begin(), space.end(), record.gold) == space.end()) {
            throw DataError(path, line, "gold label '" + gold + "' outside the " +
                                            to_string(kind) + " label space");
        }

        try {
            record.split = split_from_string(j.at("split").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw DataError(path, line, e.what());
        }
        if (j.contains("external_ids")) {
            for (const auto& id : j.at("external_ids")) {
                record.external_ids.insert(id.get<std::string>());
            }
        }
        records.push_back(std::move(record));
    });
    return records;
}

std::vector<DatasetRecord> filter_split(const std::vector<DatasetRecord>& records, Split split) {
    std::vector<DatasetRecord> out;
    for (const auto& record : records) {
        if (record.split == split) out.push_back(record);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    pipeline.validate();
    if (parallelism == 0) throw std::invalid_argument("parallelism must be >= 1");
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    return {
        {"pipeline",
         {{"k", cfg.pipeline.k},
          {"m", cfg.pipeline.m},
          {"tau_ovlp", cfg.pipeline.tau_ovlp},
          {"tau_evid", cfg.pipeline.tau_evid},
          {"shots", cfg.pipeline.shots},
          {"selection_policy", to_string(cfg.pipeline.selection_policy)},
          {"seed", cfg.pipeline.seed},
          {"dataset", to_string(cfg.pipeline.dataset_kind)},
          {"rerank", cfg.pipeline.rerank},
          {"context_j", cfg.pipeline.context_j},
          {"dedup_threshold", cfg.pipeline.dedup_threshold},
          {"diversity_threshold", cfg.pipeline.diversity_threshold},
          {"generator_model", cfg.pipeline.generator_model},
          {"record_latency", cfg.pipeline.record_latency}}},
        {"clients",
         {{"generator", client_spec_to_json(cfg.clients.generator)},
          {"rewriter", client_spec_to_json(cfg.clients.rewriter)},
          {"judge", client_spec_to_json(cfg.clients.judge)},
          {"embedder", client_spec_to_json(cfg.clients.embedder)},
          {"reranker", client_spec_to_json(cfg.clients.reranker)}}},
        {"parallelism", cfg.parallelism},
    };
}

RunConfig config_from_json(const nlohmann::json& j) {
    expect_keys(j, {"pipeline", "clients", "parallelism"}, "config");
    RunConfig cfg;
    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        expect_keys(p,
                    {"k", "m", "tau_ovlp", "tau_evid", "shots", "selection_policy", "seed",
                     "dataset", "rerank", "context_j", "dedup_threshold", "diversity_threshold",
                     "generator_model", "record_latency"},
                    "config.pipeline");
        read_field(p, "k", cfg.pipeline.k);
        read_field(p, "m", cfg.pipeline.m);
        read_field(p, "tau_ovlp", cfg.pipeline.tau_ovlp);
        read_field(p, "tau_evid", cfg.pipeline.tau_evid);
        read_field(p, "shots", cfg.pipeline.shots);
        if (p.contains("selection_policy")) {
            cfg.pipeline.selection_policy =
                selection_policy_from_string(p.at("selection_policy").get<std::string>());
        }
        read_field(p, "seed", cfg.pipeline.seed);
        if (p.contains("dataset")) {
            cfg.pipeline.dataset_kind =
                dataset_kind_from_string(p.at("dataset").get<std::string>());
        }
        read_field(p, "rerank", cfg.pipeline.rerank);
        read_field(p, "context_j", cfg.pipeline.context_j);
        read_field(p, "dedup_threshold", cfg.pipeline.dedup_threshold);
        read_field(p, "diversity_threshold", cfg.pipeline.diversity_threshold);
        read_field(p, "generator_model", cfg.pipeline.generator_model);
        read_field(p, "record_latency", cfg.pipeline.record_latency);
    }
    if (j.contains("clients")) {
        const auto& c = j.at("clients");
        expect_keys(c, {"generator", "rewriter", "judge", "embedder", "reranker"},
                    "config.clients");
        if (c.contains("generator")) {
            cfg.clients.generator = client_spec_from_json(c.at("generator"), "config.clients.generator");
        }
        if (c.contains("rewriter")) {
            cfg.clients.rewriter = client_spec_from_json(c.at("rewriter"), "config.clients.rewriter");
        }
        if (c.contains("judge")) {
            cfg.clients.judge = client_spec_from_json(c.at("judge"), "config.clients.judge");
        }
        if (c.contains("embedder")) {
            cfg.clients.embedder = client_spec_from_json(c.at("embedder"), "config.clients.embedder");
        }
        if (c.contains("reranker")) {
            cfg.clients.reranker = client_spec_from_json(c.at("reranker"), "config.clients.reranker");
        }
    }
    read_field(j, "parallelism", cfg.parallelism);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path, 0, std::string("not valid JSON: ") + e.what());
    }
    try {
        auto cfg = config_from_json(j);
        cfg.validate();
        return cfg;
    } catch (const DataError& e) {
        throw DataError(path, 0, e.what());
    } catch (const std::exception& e) {
        throw DataError(path, 0, e.what());
    }
}

std::string config_fingerprint(const RunConfig& cfg) {
    return to_hex(fnv1a64(config_to_json(cfg).dump()));
}

pipeline::PipelineClients ClientSet::refs() const {
    return {*generator, *rewriter, *judge, *embedder, *reranker};
}

ClientSet make_clients(const ClientsConfig& cfg) {
    ClientSet set;
    set.generator = make_chat(cfg.generator, "generator");
    set.rewriter = make_chat(cfg.rewriter, "rewriter");
    set.judge = make_chat(cfg.judge, "judge");
    set.embedder = make_embed(cfg.embedder);
    set.reranker = make_rerank(cfg.reranker);
    return set;
}

// ---------------------------------------------------------------------------
// Batch evaluation
// ---------------------------------------------------------------------------

RunReport run_eval(const std::vector<DatasetRecord>& dataset, const index::Bm25Index& corpus,
                   const pipeline::PipelineClients& model_clients, const demos::DemoPool* pool,
                   const RunConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("run_eval over an empty dataset");
    cfg.validate();
    if (cfg.pipeline.shots > 0 && pool == nullptr) {
        throw std::invalid_argument("few-shot config needs a demonstration pool");
    }

    std::vector<pipeline::PipelineTrace> traces(dataset.size());
    const auto worker_count = std::min<std::size_t>(cfg.parallelism, dataset.size());

    const auto process = [&](std::size_t i) {
        const auto& record = dataset[i];
        try {
            traces[i] = pipeline::answer_query(record.question, corpus, model_clients, pool,
                                               cfg.pipeline, record.external_ids);
            traces[i].query_id = record.id;
        } catch (const std::exception& e) {
            traces[i] = error_trace(record, e.what());
        }
    };

    if (worker_count <= 1) {
        for (std::size_t i = 0; i < dataset.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < worker_count; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < dataset.size();
                     i = next.fetch_add(1)) {
                    process(i);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    std::vector<AnswerLabel> golds;
    for (const auto& record : dataset) golds.push_back(record.gold);
    return recompute_aggregates(std::move(traces), std::move(golds), config_fingerprint(cfg));
}

RunReport recompute_aggregates(std::vector<pipeline::PipelineTrace> traces,
                               std::vector<AnswerLabel> golds, std::string config_fingerprint) {
    if (traces.empty() || traces.size() != golds.size()) {
        throw std::invalid_argument("traces and golds must be non-empty and aligned");
    }
    RunReport report;
    report.config_fingerprint = std::move(config_fingerprint);
    report.traces = std::move(traces);
    report.golds = std::move(golds);

    std::vector<AnswerLabel> predictions;
    double faithfulness_sum = 0.0;
    std::size_t faithfulness_count = 0;
    std::size_t abstained = 0;
    std::size_t rewrites = 0;
    for (const auto& trace : report.traces) {
        predictions.push_back(trace.generation.answer);
        abstained += trace.generation.answer == AnswerLabel::abstain;
        rewrites += trace.rewrite_triggered;
        report.error_count += trace.error;
        if (trace.faithfulness) {
            faithfulness_sum += *trace.faithfulness;
            ++faithfulness_count;
        }
    }
    const auto n = static_cast<double>(report.traces.size());
    report.accuracy = metrics::accuracy(predictions, report.golds);
    report.abstention_rate = static_cast<double>(abstained) / n;
    report.rewrite_trigger_rate = static_cast<double>(rewrites) / n;
    if (faithfulness_count > 0) {
        report.mean_faithfulness = faithfulness_sum / static_cast<double>(faithfulness_count);
    }
    return report;
}

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json results = nlohmann::json::array();
    for (std::size_t i = 0; i < report.traces.size(); ++i) {
        const auto& trace = report.traces[i];
        results.push_back({
            {"id", trace.query_id},
            {"gold", to_string(report.golds[i])},
            {"answer", to_string(trace.generation.answer)},
            {"correct", trace.generation.answer != AnswerLabel::abstain &&
                            trace.generation.answer == report.golds[i]},
            {"faithfulness",
             trace.faithfulness ? nlohmann::json(*trace.faithfulness) : nlohmann::json()},
        });
    }
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& trace : report.traces) traces.push_back(pipeline::trace_to_json(trace));
    return {
        {"config_fingerprint", report.config_fingerprint},
        {"n", report.traces.size()},
        {"metrics",
         {{"accuracy", report.accuracy},
          {"abstention_rate", report.abstention_rate},
          {"rewrite_trigger_rate", report.rewrite_trigger_rate},
          {"mean_faithfulness", report.mean_faithfulness
                                    ? nlohmann::json(*report.mean_faithfulness)
                                    : nlohmann::json()},
          {"error_count", report.error_count}}},
        {"results", results},
        {"traces", traces},
    };
}

RunReport report_from_json(const nlohmann::json& j) {
    std::vector<pipeline::PipelineTrace> traces;
    for (const auto& t : j.at("traces")) traces.push_back(pipeline::trace_from_json(t));
    std::vector<AnswerLabel> golds;
    for (const auto& row : j.at("results")) {
        golds.push_back(answer_label_from_string(row.at("gold").get<std::string>()));
    }
    return recompute_aggregates(std::move(traces), std::move(golds),
                                j.at("config_fingerprint").get<std::string>());
}

std::string render_report(const RunReport& report) {
    std::string out;
    out += "run " + report.config_fingerprint + "  (" + std::to_string(report.traces.size()) +
           " queries)\n";
    out += "  accuracy              " + format_number(report.accuracy) + "\n";
    out += "  abstention rate       " + format_number(report.abstention_rate) + "\n";
    out += "  rewrite trigger rate  " + format_number(report.rewrite_trigger_rate) + "\n";
    out += "  mean faithfulness     " +
           (report.mean_faithfulness ? format_number(*report.mean_faithfulness)
                                     : std::string("n/a")) +
           "\n";
    out += "  errors                " + std::to_string(report.error_count) + "\n";
    out += "\n  id                    gold     answer   ok  faith   rewrite\n";
    for (std::size_t i = 0; i < report.traces.size(); ++i) {
        const auto& trace = report.traces[i];
        const bool correct = trace.generation.answer != AnswerLabel::abstain &&
                             trace.generation.answer == report.golds[i];
        char line[160];
        std::snprintf(line, sizeof line, "  %-20s  %-7s  %-7s  %-2s  %-6s  %s\n",
                      trace.query_id.c_str(), to_string(report.golds[i]).c_str(),
                      to_string(trace.generation.answer).c_str(), correct ? "y" : "n",
                      trace.faithfulness ? format_number(*trace.faithfulness).c_str() : "n/a",
                      trace.rewrite_triggered ? "y" : "n");
        out += line;
    }
    return out;
}

void reverify_traces(std::vector<pipeline::PipelineTrace>& traces, clients::ChatClient& judge,
                     std::size_t context_j) {
    for (auto& trace : traces) {
        trace.verification.reset();
        trace.faithfulness.reset();
        if (trace.error || trace.evidence.passages.empty()) continue;
        const auto& rationale = trace.generation.rationale;
        if (verification::segment(rationale).empty()) continue;
        const auto ctx = context_j == 0
                             ? trace.evidence.passages.size()
                             : std::min(context_j, trace.evidence.passages.size());
        trace.verification = verification::verify_rationale(judge, trace.original_query,
                                                            trace.evidence, ctx, rationale);
        trace.faithfulness = trace.verification->faithfulness;
    }
}

// ---------------------------------------------------------------------------
// Ablation sweeps
// ---------------------------------------------------------------------------

AblationTable run_ablation(const std::vector<DatasetRecord>& dataset,
                           const index::Bm25Index& corpus,
                           const pipeline::PipelineClients& model_clients,
                           const demos::DemoPool* pool, const RunConfig& base_cfg) {
    if (pool == nullptr) {
        throw std::invalid_argument("ablation sweeps include few-shot cells; pool required");
    }

    AblationTable table;
    const SelectionPolicy policies[] = {SelectionPolicy::static_pool,
                                        SelectionPolicy::similarity_only};
    for (bool rerank : {false, true}) {
        for (auto policy : policies) {
            for (std::size_t shots = 0; shots <= 4; ++shots) {
                RunConfig cfg = base_cfg;
                cfg.pipeline.rerank = rerank;
                cfg.pipeline.selection_policy = policy;
                cfg.pipeline.shots = shots;
                const auto report = run_eval(dataset, corpus, model_clients, pool, cfg);

                AblationRow row;
                row.rerank = rerank;
                row.policy = policy;
                row.shots = shots;
                row.accuracy = report.accuracy;
                row.mean_faithfulness = report.mean_faithfulness;
                row.config_fingerprint = report.config_fingerprint;
                table.rows.push_back(std::move(row));
            }
        }
    }

    const auto find_row = [&](bool rerank, SelectionPolicy policy,
                              std::size_t shots) -> const AblationRow& {
        for (const auto& row : table.rows) {
            if (row.rerank == rerank && row.policy == policy && row.shots == shots) return row;
        }
        throw std::logic_error("ablation grid row missing");
    };

    nlohmann::json rerank_deltas = nlohmann::json::array();
    for (auto policy : policies) {
        for (std::size_t shots = 0; shots <= 4; ++shots) {
            rerank_deltas.push_back(
                {{"policy", to_string(policy)},
                 {"shots", shots},
                 {"delta", find_row(true, policy, shots).accuracy -
                               find_row(false, policy, shots).accuracy}});
        }
    }
    nlohmann::json dynamic_deltas = nlohmann::json::array();
    for (bool rerank : {false, true}) {
        for (std::size_t shots = 0; shots <= 4; ++shots) {
            dynamic_deltas.push_back(
                {{"rerank", rerank},
                 {"shots", shots},
                 {"delta",
                  find_row(rerank, SelectionPolicy::similarity_only, shots).accuracy -
                      find_row(rerank, SelectionPolicy::static_pool, shots).accuracy}});
        }
    }
    table.deltas = {{"rerank", rerank_deltas}, {"dynamic_vs_static", dynamic_deltas}};
    return table;
}

nlohmann::json ablation_to_json(const AblationTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        rows.push_back({
            {"rerank", row.rerank},
            {"policy", to_string(row.policy)},
            {"shots", row.shots},
            {"accuracy", row.accuracy},
            {"mean_faithfulness", row.mean_faithfulness ? nlohmann::json(*row.mean_faithfulness)
                                                        : nlohmann::json()},
            {"config_fingerprint", row.config_fingerprint},
        });
    }
    return {{"rows", rows}, {"deltas", table.deltas}};
}

std::string render_ablation(const AblationTable& table) {
    std::string out = "  rerank  policy           shots  accuracy\n";
    for (const auto& row : table.rows) {
        char line[96];
        std::snprintf(line, sizeof line, "  %-6s  %-15s  %zu      %s\n",
                      row.rerank ? "on" : "off", to_string(row.policy).c_str(), row.shots,
                      format_number(row.accuracy).c_str());
        out += line;
    }
    out += "\n  delta: reranking on - off\n";
    for (const auto& d : table.deltas.at("rerank")) {
        char line[96];
        std::snprintf(line, sizeof line, "  %-15s  %zu      %+.4f\n",
                      d.at("policy").get<std::string>().c_str(), d.at("shots").get<std::size_t>(),
                      d.at("delta").get<double>());
        out += line;
    }
    out += "\n  delta: dynamic - static selection\n";
    for (const auto& d : table.deltas.at("dynamic_vs_static")) {
        char line[96];
        std::snprintf(line, sizeof line, "  rerank %-3s      %zu      %+.4f\n",
                      d.at("rerank").get<bool>() ? "on" : "off", d.at("shots").get<std::size_t>(),
                      d.at("delta").get<double>());
        out += line;
    }
    return out;
}

}  // namespace verirag::harness
