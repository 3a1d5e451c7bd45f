// verirag command-line driver: ingest, embed, calibrate, verify, report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "verirag/verirag.hpp"

#ifndef VERIRAG_DEFAULT_PROMPTS
#define VERIRAG_DEFAULT_PROMPTS "assets/prompts"
#endif

namespace fs = std::filesystem;
using namespace verirag;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool mock = false;
    bool csv = false;
};

RunConfig load_config(const Globals& g) {
    RunConfig cfg = g.config.empty() ? parse_run_config(json::object(), fs::current_path())
                                     : load_run_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    if (cfg.paths.prompts.empty()) cfg.paths.prompts = VERIRAG_DEFAULT_PROMPTS;
    if (cfg.paths.params.empty()) cfg.paths.params = cfg.paths.output / "params.json";
    return cfg;
}

Corpus load_corpus(const RunConfig& cfg) {
    if (cfg.paths.manifest.empty()) throw ConfigError("paths.manifest is not set");
    return ingest(cfg.paths.manifest);
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& cfg, bool mock) {
    if (cfg.embedder.kind == "http" && !mock) {
        LlmSettings s = cfg.llm;
        return std::make_unique<HttpEmbedder>(s, cfg.embedder.model, cfg.embedder.dim);
    }
    return std::make_unique<HashEmbedder>(cfg.embedder.dim, cfg.seed, cfg.tokenizer);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

int cmd_ingest(const Globals& g) {
    const RunConfig cfg = load_config(g);
    const Corpus corpus = load_corpus(cfg);
    const json summary = to_json(summarize(corpus));
    write_file_atomic(cfg.paths.output / "corpus_summary.json", dump(summary));
    std::cout << "ingested " << summary["documents"] << " documents, " << summary["chunks"] << " chunks, "
              << summary["claims"] << " claims\n";
    for (const auto& [label, n] : summary["scenarios"].items()) std::cout << "  " << label << ": " << n << " documents\n";
    return 0;
}

int cmd_embed(const Globals& g) {
    const RunConfig cfg = load_config(g);
    Corpus corpus = load_corpus(cfg);
    auto embedder = make_embedder(cfg, g.mock);
    const fs::path out = cfg.embeddings_path();
    const bool remote = cfg.embedder.kind == "http" && !g.mock;
    // Hash vectors are cheap and seed-dependent, so only remote runs resume.
    if (remote && fs::exists(out)) load_embeddings(corpus, out, embedder->dimension());
    try {
        const EmbedReport r = embed_chunks(corpus, *embedder, cfg.embedder.batch_size);
        write_file_atomic(out, serialize_embeddings(corpus));
        std::cout << "embedded " << r.embedded << " chunks (" << r.skipped << " already present) -> " << out.string()
                  << "\n";
        for (const auto& id : r.zero_vectors) std::cerr << "warning: chunk '" << id << "' has no tokens; zero vector\n";
    } catch (const EmbeddingError& e) {
        write_file_atomic(out, serialize_embeddings(corpus));
        std::cerr << "error: " << e.what() << "\nunembedded:";
        for (const auto& id : e.unembedded()) std::cerr << " " << id;
        std::cerr << "\n";
        return 1;
    }
    return 0;
}

int cmd_calibrate(const Globals& g) {
    const RunConfig cfg = load_config(g);
    if (cfg.paths.calibration.empty()) throw ConfigError("paths.calibration is not set");
    std::ifstream in(cfg.paths.calibration);
    if (!in) throw ConfigError("cannot open calibration file " + cfg.paths.calibration.string());
    const auto records = load_calibration_records(in, cfg.paths.calibration.filename().string());
    if (records.empty()) throw ConfigError("calibration file " + cfg.paths.calibration.string() + " has no records");

    const CalibrationResult res = calibrate(records, cfg.grid, cfg.threshold, cfg.ridge_gamma);
    ModelParams p{res.search.params, res.ridge, true};
    json j = to_json(p);
    j["calibration"] = {{"records", records.size()},
                        {"decidable", res.search.decidable},
                        {"correct", res.search.correct},
                        {"accuracy", round_sig(res.search.accuracy())},
                        {"grid", {{"alpha", cfg.grid.alpha_values.size()}, {"lambda", cfg.grid.lambda_values.size()}}}};
    write_file_atomic(cfg.paths.params, dump(j));
    std::cout << "alpha=" << j["alpha"] << " lambda=" << j["lambda"] << " accuracy=" << j["calibration"]["accuracy"]
              << " (" << res.search.correct << "/" << res.search.decidable << ") -> " << cfg.paths.params.string()
              << "\n";
    return 0;
}

struct VerifyOptions {
    std::vector<std::string> methods;
    std::vector<std::string> scenarios;
    std::vector<std::string> claim_ids;
    std::vector<std::string> ablate;
    std::string output = "run.json";
};

int cmd_verify(const Globals& g, const VerifyOptions& o) {
    RunConfig cfg = load_config(g);

    if (!o.methods.empty()) {
        cfg.methods.clear();
        for (const auto& m : o.methods) {
            if (detail::squash(m) == "all") {
                cfg.methods.assign(kAllMethods.begin(), kAllMethods.end());
                break;
            }
            auto p = parse_method(m);
            if (!p) throw CLI::ValidationError("--method", "unknown method '" + m + "'");
            cfg.methods.push_back(*p);
        }
    }
    if (!o.scenarios.empty()) {
        cfg.scenarios.clear();
        for (const auto& s : o.scenarios) {
            if (detail::squash(s) == "all") {
                cfg.scenarios.assign(kAllScenarios.begin(), kAllScenarios.end());
                break;
            }
            auto p = parse_scenario(s);
            if (!p) throw CLI::ValidationError("--scenario", "unknown scenario '" + s + "'");
            cfg.scenarios.push_back(*p);
        }
    }
    for (const auto& a : o.ablate) {
        const std::string k = detail::squash(a);
        if (k == "hv") cfg.ablation.use_hv_score = false;
        else if (k == "threshold") cfg.ablation.use_dynamic_threshold = false;
        else if (k == "redundancy") cfg.ablation.use_redundancy_penalty = false;
        else throw CLI::ValidationError("--ablate", "expected hv, threshold or redundancy, got '" + a + "'");
    }

    // Build every model before touching the corpus so a missing key fails fast.
    const PromptLibrary prompts = PromptLibrary::load(cfg.paths.prompts);
    std::unique_ptr<ChatModel> chat;
    std::unique_ptr<Auditor> auditor;
    if (g.mock) {
        chat = std::make_unique<MockChatModel>(cfg.seed);
        auditor = std::make_unique<MockAuditor>(cfg.seed, &prompts, cfg.mock_audit);
    } else {
        if (!cfg.paths.transcript.empty())
            chat = std::make_unique<ScriptedChatModel>(ScriptedChatModel::load(cfg.paths.transcript));
        else
            chat = std::make_unique<HttpChatModel>(cfg.llm);
        auditor = std::make_unique<LlmAuditor>(*chat, prompts, cfg.llm.token_budget, cfg.llm_max_attempts);
    }

    Corpus corpus = load_corpus(cfg);
    std::unique_ptr<Embedder> embedder;
    bool needs_retrieval = false;
    for (const auto& c : corpus.claims) needs_retrieval = needs_retrieval || !corpus.evidence_map.contains(c.id);
    if (needs_retrieval) {
        embedder = make_embedder(cfg, g.mock);
        if (cfg.embedder.kind == "hash" || g.mock) {
            embed_chunks(corpus, *embedder, cfg.embedder.batch_size);
        } else {
            const fs::path emb = cfg.embeddings_path();
            if (fs::exists(emb)) load_embeddings(corpus, emb, embedder->dimension());
            for (const auto* c : corpus.all_chunks())
                if (!c->embedding) throw ConfigError("chunk '" + c->id + "' has no embedding; run `embed` first");
        }
    }

    const ModelParams params = load_params(cfg);
    EngineContext ctx{corpus,       params, cfg.threshold, cfg.ablation, cfg.tokenizer, *auditor,
                      *chat,        prompts, cfg.llm_max_attempts};
    const MatrixSpec spec{o.claim_ids, cfg.methods, cfg.scenarios, cfg.threads};
    const RunReport report = run_matrix(ctx, spec, embedder.get(), cfg.retrieval_k);

    json methods = json::array(), scenarios = json::array();
    for (Method m : cfg.methods) methods.push_back(to_string(m));
    for (ScenarioLabel s : cfg.scenarios) scenarios.push_back(to_string(s));
    json out = to_json(report);
    out["run"] = {{"seed", cfg.seed},
                  {"mock", g.mock},
                  {"methods", methods},
                  {"scenarios", scenarios},
                  {"ablation",
                   {{"use_hv_score", cfg.ablation.use_hv_score},
                    {"use_dynamic_threshold", cfg.ablation.use_dynamic_threshold},
                    {"use_redundancy_penalty", cfg.ablation.use_redundancy_penalty}}},
                  {"params", to_json(params)},
                  {"params_calibrated", params.calibrated}};
    const fs::path path = cfg.paths.output / o.output;
    write_file_atomic(path, dump(out));

    std::cout << report.records.size() << " verdict records, " << report.failures.size() << " failures -> "
              << path.string() << "\n";
    for (const auto& f : report.failures)
        std::cerr << "failed: " << f.claim_id << " " << to_string(f.method) << " " << to_string(f.scenario) << ": "
                  << f.error << "\n";
    return report.records.empty() ? 1 : 0;
}

int cmd_report(const Globals& g, const std::string& run_name) {
    const RunConfig cfg = load_config(g);
    const fs::path path = cfg.paths.output / run_name;
    std::ifstream in(path);
    if (!in) throw ConfigError("no run file at " + path.string() + " (run `verify` first)");
    json run;
    try {
        run = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    std::vector<VerdictRecord> records;
    for (const auto& r : run.value("records", json::array())) records.push_back(record_from_json(r));
    if (records.empty()) throw ConfigError("run file " + path.string() + " holds no verdict records");

    std::vector<Method> methods;
    std::vector<ScenarioLabel> scenarios;
    for (const auto& r : records) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
        if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end())
            scenarios.push_back(r.scenario);
    }
    std::sort(methods.begin(), methods.end());
    std::sort(scenarios.begin(), scenarios.end());

    const auto metrics = compute_metrics(records, methods, scenarios);
    if (run.contains("metrics")) {
        json fresh = metrics_json(metrics), kept = json::array();
        for (const auto& m : run["metrics"])
            for (const auto& f : fresh)
                if (m.value("method", "") == f["method"] && m.value("scenario", "") == f["scenario"]) kept.push_back(m);
        if (kept != fresh) std::cerr << "warning: stored metrics differ from metrics recomputed from records\n";
    }

    const std::string table = render_table(metrics, methods, scenarios);
    json rep = {{"records", records.size()},
                {"failures", run.value("failures", json::array()).size()},
                {"metrics", metrics_json(metrics)}};
    write_file_atomic(cfg.paths.output / "report.json", dump(rep));
    write_file_atomic(cfg.paths.output / "report.txt", table);
    if (g.csv) {
        const std::string csv = render_csv(metrics);
        write_file_atomic(cfg.paths.output / "report.csv", csv);
        std::cout << csv;
    } else {
        std::cout << table;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"verirag: claim verification over audited scientific evidence"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "run configuration JSON");
    app.add_option("--seed", g.seed, "seed for offline doubles and synthetic data");
    app.add_flag("--mock", g.mock, "use the offline auditor and chat model");
    app.add_flag("--csv", g.csv, "emit machine-readable CSV rows");

    auto* ingest_cmd = app.add_subcommand("ingest", "load and validate the corpus manifest");
    auto* embed_cmd = app.add_subcommand("embed", "embed every chunk and store embeddings.jsonl");
    auto* calibrate_cmd = app.add_subcommand("calibrate", "fit the boldness model and tune alpha/lambda");
    auto* verify_cmd = app.add_subcommand("verify", "run the verification matrix");
    auto* report_cmd = app.add_subcommand("report", "aggregate verdict records into metric tables");

    VerifyOptions vo;
    verify_cmd->add_option("--method", vo.methods, "verirag, cot, selfrag, flare, ciber or all")->delimiter(',');
    verify_cmd->add_option("--scenario", vo.scenarios, "TY0, TY1, TY3, TY5 or all")->delimiter(',');
    verify_cmd->add_option("--claim-id", vo.claim_ids, "restrict to these claims")->delimiter(',');
    verify_cmd->add_option("--ablate", vo.ablate, "hv, threshold, redundancy")->delimiter(',');
    verify_cmd->add_option("--output", vo.output, "run file name inside the output directory");
    std::string run_name = "run.json";
    report_cmd->add_option("--run", run_name, "run file name inside the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(g);
        if (*embed_cmd) return cmd_embed(g);
        if (*calibrate_cmd) return cmd_calibrate(g);
        if (*verify_cmd) return cmd_verify(g, vo);
        if (*report_cmd) return cmd_report(g, run_name);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
