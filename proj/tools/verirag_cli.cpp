#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "verirag/harness.hpp"
#include "verirag/jsonl.hpp"

using namespace verirag;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string corpus_index_path;
    std::string dataset_path;
    std::string pool_path;
    std::string pool_meta_path;

    // Targeted overrides on top of --config.
    std::optional<std::size_t> k, m, shots, context_j, parallelism;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> selection, rerank, dataset_kind;
};

harness::RunConfig resolve_config(const CommonArgs& args) {
    harness::RunConfig cfg;
    if (!args.config_path.empty()) cfg = harness::load_run_config(args.config_path);
    if (args.k) cfg.pipeline.k = *args.k;
    if (args.m) cfg.pipeline.m = *args.m;
    if (args.shots) cfg.pipeline.shots = *args.shots;
    if (args.context_j) cfg.pipeline.context_j = *args.context_j;
    if (args.parallelism) cfg.parallelism = *args.parallelism;
    if (args.seed) cfg.pipeline.seed = *args.seed;
    if (args.selection) {
        cfg.pipeline.selection_policy = selection_policy_from_string(*args.selection);
    }
    if (args.rerank) cfg.pipeline.rerank = *args.rerank == "on";
    if (args.dataset_kind) {
        cfg.pipeline.dataset_kind = dataset_kind_from_string(*args.dataset_kind);
    }
    cfg.validate();
    return cfg;
}

void add_overrides(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration JSON");
    cmd->add_option("--k", args.k, "BM25 candidate count");
    cmd->add_option("--m", args.m, "evidence passages after reranking");
    cmd->add_option("--shots", args.shots, "demonstrations per query (0..4)");
    cmd->add_option("--context-j", args.context_j, "passages shown to the judge (0 = all)");
    cmd->add_option("--parallelism", args.parallelism, "batch worker threads");
    cmd->add_option("--seed", args.seed, "run seed");
    cmd->add_option("--selection", args.selection, "demo selection policy")
        ->check(CLI::IsMember({"similarity_only", "label_balanced", "static"}));
    cmd->add_option("--rerank", args.rerank, "cross-encoder reranking")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--dataset-kind", args.dataset_kind, "dataset label space")
        ->check(CLI::IsMember({"bioasq", "pubmedqa"}));
}

std::vector<harness::DatasetRecord> load_split(const std::string& path, DatasetKind kind,
                                               const std::string& split) {
    auto records = harness::load_dataset(path, kind);
    if (split != "all") {
        records = harness::filter_split(records, harness::split_from_string(split));
    }
    if (records.empty()) {
        throw DataError(path, 0, "no records in split '" + split + "'");
    }
    return records;
}

demos::DemoPool load_pool_if_given(const CommonArgs& args, bool required) {
    if (args.pool_path.empty()) {
        if (required) throw DataError("this command needs --pool and --pool-meta");
        return {};
    }
    const auto meta = args.pool_meta_path.empty() ? args.pool_path + ".meta.json"
                                                  : args.pool_meta_path;
    return demos::load_pool(args.pool_path, meta);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verirag: retrieve-rerank-reason-verify pipeline"};
    app.require_subcommand(1);
    std::function<void()> action;

    // --- index -------------------------------------------------------------
    auto* cmd_index = app.add_subcommand("index", "build a BM25 index from a corpus JSONL");
    {
        static std::string corpus_path, out_path;
        cmd_index->add_option("--corpus", corpus_path, "corpus JSONL")->required();
        cmd_index->add_option("--out", out_path, "index output path")->required();
        cmd_index->callback([&] {
            action = [&] {
                const auto docs = index::load_corpus_jsonl(corpus_path);
                const auto corpus = index::Bm25Index::build(docs);
                corpus.save(out_path);
                std::printf("indexed %zu documents -> %s\n", docs.size(), out_path.c_str());
            };
        });
    }

    // --- build-demos ---------------------------------------------------------
    auto* cmd_demos = app.add_subcommand("build-demos",
                                         "generate a demonstration pool from the train split");
    {
        static CommonArgs args;
        static std::string out_pool, out_meta;
        add_overrides(cmd_demos, args);
        cmd_demos->add_option("--corpus-index", args.corpus_index_path)->required();
        cmd_demos->add_option("--dataset", args.dataset_path, "dataset JSONL")->required();
        cmd_demos->add_option("--pool", out_pool, "pool JSONL output")->required();
        cmd_demos->add_option("--pool-meta", out_meta, "pool metadata output");
        cmd_demos->callback([&] {
            action = [&] {
                const auto cfg = resolve_config(args);
                const auto corpus = index::Bm25Index::load(args.corpus_index_path);
                const auto records = load_split(args.dataset_path, cfg.pipeline.dataset_kind,
                                                "train");
                std::vector<demos::TrainExample> train;
                for (const auto& r : records) {
                    train.push_back({r.id, r.question, r.gold, r.external_ids});
                }
                const auto clients = harness::make_clients(cfg.clients);
                demos::PoolBuildConfig pool_cfg;
                pool_cfg.k = cfg.pipeline.k;
                pool_cfg.m = cfg.pipeline.m;
                pool_cfg.dataset_kind = cfg.pipeline.dataset_kind;
                pool_cfg.seed = cfg.pipeline.seed;
                auto result = demos::build_pool(train, corpus, *clients.generator,
                                                *clients.embedder, *clients.reranker, pool_cfg);
                const auto before = result.pool.demonstrations.size();
                result.pool = demos::deduplicate(result.pool, cfg.pipeline.dedup_threshold);
                const auto meta = out_meta.empty() ? out_pool + ".meta.json" : out_meta;
                demos::save_pool(result, out_pool, meta, cfg.pipeline.dedup_threshold);
                std::printf("pool: %zu demonstrations (%zu near-duplicates dropped, "
                            "%zu records skipped) -> %s\n",
                            result.pool.demonstrations.size(),
                            before - result.pool.demonstrations.size(), result.skipped.size(),
                            out_pool.c_str());
            };
        });
    }

    // --- run -----------------------------------------------------------------
    auto* cmd_run = app.add_subcommand("run", "run the pipeline over a dataset split");
    {
        static CommonArgs args;
        static std::string split = "test", traces_path, report_path, table_path;
        add_overrides(cmd_run, args);
        cmd_run->add_option("--corpus-index", args.corpus_index_path)->required();
        cmd_run->add_option("--dataset", args.dataset_path)->required();
        cmd_run->add_option("--pool", args.pool_path, "demonstration pool JSONL");
        cmd_run->add_option("--pool-meta", args.pool_meta_path);
        cmd_run->add_option("--split", split)->check(CLI::IsMember({"train", "dev", "test", "all"}));
        cmd_run->add_option("--traces", traces_path, "trace JSONL output")->required();
        cmd_run->add_option("--report", report_path, "report JSON output");
        cmd_run->add_option("--table", table_path, "rendered text table output");
        cmd_run->callback([&] {
            action = [&] {
                const auto cfg = resolve_config(args);
                const auto corpus = index::Bm25Index::load(args.corpus_index_path);
                const auto dataset =
                    load_split(args.dataset_path, cfg.pipeline.dataset_kind, split);
                const auto pool = load_pool_if_given(args, cfg.pipeline.shots > 0);
                const auto clients = harness::make_clients(cfg.clients);
                const auto report = harness::run_eval(
                    dataset, corpus, clients.refs(),
                    args.pool_path.empty() ? nullptr : &pool, cfg);
                pipeline::save_traces_jsonl(traces_path, report.traces);
                if (!report_path.empty()) {
                    write_text_file(report_path, harness::report_to_json(report).dump(2) + "\n");
                }
                if (!table_path.empty()) {
                    write_text_file(table_path, harness::render_report(report));
                }
                std::fputs(harness::render_report(report).c_str(), stdout);
            };
        });
    }

    // --- verify ----------------------------------------------------------------
    auto* cmd_verify = app.add_subcommand(
        "verify", "re-judge stored traces under a different evidence context");
    {
        static CommonArgs args;
        static std::string traces_path, out_path;
        static std::size_t context_j = 0;
        cmd_verify->add_option("--config", args.config_path);
        cmd_verify->add_option("--traces", traces_path, "trace JSONL input")->required();
        cmd_verify->add_option("--out", out_path, "re-verified trace JSONL output")->required();
        cmd_verify->add_option("--context-j", context_j, "passages shown to the judge (0 = all)");
        cmd_verify->callback([&] {
            action = [&] {
                const auto cfg = resolve_config(args);
                auto traces = pipeline::load_traces_jsonl(traces_path);
                const auto clients = harness::make_clients(cfg.clients);
                harness::reverify_traces(traces, *clients.judge, context_j);
                pipeline::save_traces_jsonl(out_path, traces);
                std::size_t verified = 0;
                for (const auto& t : traces) verified += t.verification.has_value();
                std::printf("re-verified %zu of %zu traces -> %s\n", verified, traces.size(),
                            out_path.c_str());
            };
        });
    }

    // --- evaluate / report -------------------------------------------------------
    struct EvalArgs {
        CommonArgs common;
        std::string split = "all", traces_path, out_path, table_path;
    };
    const auto add_eval_like = [&](const char* name, const char* help, bool full_report) {
        auto* cmd = app.add_subcommand(name, help);
        auto args = std::make_shared<EvalArgs>();
        cmd->add_option("--config", args->common.config_path);
        cmd->add_option("--dataset-kind", args->common.dataset_kind)
            ->check(CLI::IsMember({"bioasq", "pubmedqa"}));
        cmd->add_option("--traces", args->traces_path, "trace JSONL input")->required();
        cmd->add_option("--dataset", args->common.dataset_path, "dataset JSONL with gold labels")
            ->required();
        cmd->add_option("--split", args->split)
            ->check(CLI::IsMember({"train", "dev", "test", "all"}));
        cmd->add_option("--out", args->out_path, "JSON output");
        cmd->add_option("--table", args->table_path, "rendered text table output");
        cmd->callback([&action, args, full_report] {
            action = [args, full_report] {
                const auto cfg = resolve_config(args->common);
                const auto traces = pipeline::load_traces_jsonl(args->traces_path);
                const auto dataset =
                    load_split(args->common.dataset_path, cfg.pipeline.dataset_kind, args->split);
                std::map<std::string, AnswerLabel> gold_by_id;
                for (const auto& r : dataset) gold_by_id[r.id] = r.gold;
                std::vector<AnswerLabel> golds;
                for (const auto& trace : traces) {
                    const auto it = gold_by_id.find(trace.query_id);
                    if (it == gold_by_id.end()) {
                        throw DataError(args->traces_path, 0,
                                        "trace '" + trace.query_id + "' has no dataset record");
                    }
                    golds.push_back(it->second);
                }
                const auto fingerprint =
                    args->common.config_path.empty() ? "" : harness::config_fingerprint(cfg);
                const auto report = harness::recompute_aggregates(traces, golds, fingerprint);
                const auto j = harness::report_to_json(report);
                const auto out_json = full_report
                                          ? j
                                          : nlohmann::json{{"metrics", j.at("metrics")},
                                                           {"n", j.at("n")}};
                if (!args->out_path.empty()) {
                    write_text_file(args->out_path, out_json.dump(2) + "\n");
                }
                if (!args->table_path.empty()) {
                    write_text_file(args->table_path, harness::render_report(report));
                }
                if (full_report) {
                    std::fputs(harness::render_report(report).c_str(), stdout);
                } else {
                    std::printf("%s\n", out_json.dump(2).c_str());
                }
            };
        });
    };
    add_eval_like("evaluate", "recompute metrics from stored traces", false);
    add_eval_like("report", "regenerate a full report from stored traces", true);

    // --- agree ---------------------------------------------------------------------
    auto* cmd_agree = app.add_subcommand("agree", "annotator agreement between two label files");
    {
        static std::string ref_path, cand_path, ref_id = "reference", cand_id = "candidate";
        static std::string out_path;
        cmd_agree->add_option("--reference", ref_path, "reference label JSONL")->required();
        cmd_agree->add_option("--candidate", cand_path, "candidate label JSONL")->required();
        cmd_agree->add_option("--reference-id", ref_id);
        cmd_agree->add_option("--candidate-id", cand_id);
        cmd_agree->add_option("--out", out_path, "agreement JSON output");
        cmd_agree->callback([&] {
            action = [&] {
                const auto reference = metrics::load_label_file(ref_path, ref_id);
                const auto candidate = metrics::load_label_file(cand_path, cand_id);
                const auto report = metrics::agreement_to_json(reference, candidate);
                if (!out_path.empty()) write_text_file(out_path, report.dump(2) + "\n");
                std::fputs(metrics::render_agreement(report).c_str(), stdout);
            };
        });
    }

    // --- ablate -----------------------------------------------------------------------
    auto* cmd_ablate = app.add_subcommand("ablate",
                                          "sweep reranking x selection policy x shots");
    {
        static CommonArgs args;
        static std::string split = "test", out_path, table_path;
        add_overrides(cmd_ablate, args);
        cmd_ablate->add_option("--corpus-index", args.corpus_index_path)->required();
        cmd_ablate->add_option("--dataset", args.dataset_path)->required();
        cmd_ablate->add_option("--pool", args.pool_path)->required();
        cmd_ablate->add_option("--pool-meta", args.pool_meta_path);
        cmd_ablate->add_option("--split", split)
            ->check(CLI::IsMember({"train", "dev", "test", "all"}));
        cmd_ablate->add_option("--out", out_path, "ablation JSON output");
        cmd_ablate->add_option("--table", table_path, "rendered text table output");
        cmd_ablate->callback([&] {
            action = [&] {
                const auto cfg = resolve_config(args);
                const auto corpus = index::Bm25Index::load(args.corpus_index_path);
                const auto dataset =
                    load_split(args.dataset_path, cfg.pipeline.dataset_kind, split);
                const auto pool = load_pool_if_given(args, true);
                const auto clients = harness::make_clients(cfg.clients);
                const auto table =
                    harness::run_ablation(dataset, corpus, clients.refs(), &pool, cfg);
                if (!out_path.empty()) {
                    write_text_file(out_path, harness::ablation_to_json(table).dump(2) + "\n");
                }
                if (!table_path.empty()) {
                    write_text_file(table_path, harness::render_ablation(table));
                }
                std::fputs(harness::render_ablation(table).c_str(), stdout);
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are exit code 1
    }

    try {
        action();
        return 0;
    } catch (const ClientError& e) {
        std::fprintf(stderr, "client error: %s\n", e.what());
        return 3;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
