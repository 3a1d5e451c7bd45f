#include <gtest/gtest.h>

#include <algorithm>

#include "support/fixtures.hpp"

using vtest::CliResult;
using vtest::fs::path;
using vtest::json;
using vtest::run_cli;
using vtest::ScratchDir;
using vtest::slurp;
using vtest::spit;

namespace {

std::string quoted(const path& p) { return "'" + p.string() + "'"; }

// Scratch dir holding config.json that points at the fixture, outputs in out/.
struct Workspace {
    ScratchDir dir;
    path config;
    path out;

    explicit Workspace(const std::string& tag, json tweak = json::object()) : dir(tag) {
        out = dir / "out";
        json cfg = vtest::fixture_config(out);
        cfg["paths"]["prompts"] = VERIRAG_PROMPTS_DIR;
        cfg.merge_patch(tweak);
        config = dir / "config.json";
        spit(config, cfg.dump(2));
    }

    CliResult run(const std::string& args, const std::string& env = "") const {
        return run_cli("--config " + quoted(config) + " " + args, env);
    }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Cli, NoSubcommandIsUsageError) {
    EXPECT_EQ(run_cli("").status, 2);
    EXPECT_EQ(run_cli("frobnicate").status, 2);
    EXPECT_EQ(run_cli("--help").status, 0);
}

TEST(Cli, IngestSummarizesFixture) {
    Workspace ws("cli-ingest");
    const CliResult r = ws.run("ingest");
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("20 documents"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("10 claims"), std::string::npos) << r.output;
    const json summary = json::parse(slurp(ws.out / "corpus_summary.json"));
    EXPECT_EQ(summary["documents"], 20);
    EXPECT_EQ(summary["claims"], 10);
}

TEST(Cli, IngestRejectsDanglingEvidence) {
    ScratchDir dir("cli-dangling");
    json manifest = json::parse(slurp(path(VERIRAG_FIXTURE_DIR) / "manifest.json"));
    const path fx = VERIRAG_FIXTURE_DIR;
    for (auto& d : manifest["documents"]) {
        if (d.contains("analysis_file")) d["analysis_file"] = (fx / d["analysis_file"].get<std::string>()).string();
    }
    manifest["chunk_store"] = (fx / manifest["chunk_store"].get<std::string>()).string();
    manifest["evidence_map"]["CL01"].push_back("P404-0");
    spit(dir / "manifest.json", manifest.dump(2));
    Workspace ws("cli-dangling-ws", {{"paths", {{"manifest", (dir / "manifest.json").string()}}}});
    const CliResult r = ws.run("ingest");
    EXPECT_EQ(r.status, 1) << r.output;
    EXPECT_NE(r.output.find("P404-0"), std::string::npos) << r.output;
}

TEST(Cli, EmbedWritesOneLinePerChunk) {
    Workspace ws("cli-embed");
    const CliResult r = ws.run("embed --seed 7");
    ASSERT_EQ(r.status, 0) << r.output;
    const std::string emb = slurp(ws.out / "embeddings.jsonl");
    ASSERT_EQ(ws.run("ingest").status, 0);
    const json summary = json::parse(slurp(ws.out / "corpus_summary.json"));
    EXPECT_EQ(count_lines(emb), summary["chunks"].get<std::size_t>());
    EXPECT_EQ(ws.run("embed --seed 7").status, 0);
    EXPECT_EQ(slurp(ws.out / "embeddings.jsonl"), emb);
}

TEST(Cli, CalibrateIsReproducible) {
    Workspace ws("cli-calibrate");
    const CliResult a = ws.run("calibrate");
    ASSERT_EQ(a.status, 0) << a.output;
    const std::string first = slurp(ws.out / "params.json");
    const json p = json::parse(first);
    EXPECT_TRUE(p.contains("alpha"));
    EXPECT_TRUE(p.contains("lambda"));
    EXPECT_EQ(p["ridge"]["weights"].size(), 5u);
    EXPECT_EQ(p["calibration"]["grid"]["alpha"], 41);
    EXPECT_EQ(p["calibration"]["grid"]["lambda"], 40);
    ASSERT_EQ(ws.run("calibrate").status, 0);
    EXPECT_EQ(slurp(ws.out / "params.json"), first);
}

TEST(Cli, CalibrateEmptyFileFails) {
    ScratchDir dir("cli-empty-cal");
    spit(dir / "empty.jsonl", "");
    Workspace ws("cli-empty-cal-ws", {{"paths", {{"calibration", (dir / "empty.jsonl").string()}}}});
    const CliResult r = ws.run("calibrate");
    EXPECT_EQ(r.status, 1) << r.output;
    EXPECT_NE(r.output.find("no records"), std::string::npos) << r.output;
    EXPECT_FALSE(vtest::fs::exists(ws.out / "params.json"));
}

TEST(Cli, VerifyRejectsUnknownSelections) {
    Workspace ws("cli-unknown");
    EXPECT_EQ(ws.run("--mock verify --method oracle").status, 2);
    EXPECT_EQ(ws.run("--mock verify --scenario TY2").status, 2);
    EXPECT_EQ(ws.run("--mock verify --ablate everything").status, 2);
    EXPECT_FALSE(vtest::fs::exists(ws.out / "run.json"));
}

TEST(Cli, LiveModeWithoutKeyFails) {
    Workspace ws("cli-nokey");
    const CliResult r = ws.run("verify --method cot --scenario TY5", "env -u LLM_API_KEY LLM_MODEL=m");
    EXPECT_EQ(r.status, 1) << r.output;
    EXPECT_NE(r.output.find("LLM_API_KEY"), std::string::npos) << r.output;
}

TEST(Cli, ReportWithoutRunFails) {
    Workspace ws("cli-norun");
    EXPECT_EQ(ws.run("report").status, 1);
    spit(ws.out / "empty.json", R"({"records": []})");
    const CliResult r = ws.run("report --run empty.json");
    EXPECT_EQ(r.status, 1) << r.output;
}

TEST(Cli, VerifySubsetAndCsvReport) {
    Workspace ws("cli-subset");
    const CliResult v = ws.run("--mock --seed 7 verify --method verirag,cot --scenario TY0,TY5 --claim-id CL01,CL04");
    ASSERT_EQ(v.status, 0) << v.output;
    const json run = json::parse(slurp(ws.out / "run.json"));
    EXPECT_EQ(run["records"].size(), 8u);
    EXPECT_EQ(run["run"]["seed"], 7);
    EXPECT_TRUE(run["run"]["mock"].get<bool>());

    const CliResult r = ws.run("--csv report");
    ASSERT_EQ(r.status, 0) << r.output;
    // Header plus one row per method and scenario cell.
    EXPECT_EQ(count_lines(r.output), 1u + 4u) << r.output;
    EXPECT_EQ(slurp(ws.out / "report.csv"), r.output);
    EXPECT_TRUE(vtest::fs::exists(ws.out / "report.txt"));
}

TEST(Cli, AblationRecordedInRun) {
    Workspace ws("cli-ablate");
    ASSERT_EQ(ws.run("--mock verify --method verirag --scenario TY0 --ablate hv,redundancy").status, 0);
    const json run = json::parse(slurp(ws.out / "run.json"));
    EXPECT_FALSE(run["run"]["ablation"]["use_hv_score"].get<bool>());
    EXPECT_TRUE(run["run"]["ablation"]["use_dynamic_threshold"].get<bool>());
    EXPECT_FALSE(run["run"]["ablation"]["use_redundancy_penalty"].get<bool>());
}

TEST(Cli, MockRunsAreByteIdentical) {
    Workspace a("cli-det-a"), b("cli-det-b");
    for (const Workspace* ws : {&a, &b}) {
        ASSERT_EQ(ws->run("calibrate").status, 0);
        const CliResult v = ws->run("--mock --seed 7 verify");
        ASSERT_EQ(v.status, 0) << v.output;
        ASSERT_EQ(ws->run("report").status, 0);
    }
    // The run file embeds output-independent content only.
    EXPECT_EQ(slurp(a.out / "run.json"), slurp(b.out / "run.json"));
    EXPECT_EQ(slurp(a.out / "report.json"), slurp(b.out / "report.json"));
    EXPECT_EQ(slurp(a.out / "report.txt"), slurp(b.out / "report.txt"));
    const json run = json::parse(slurp(a.out / "run.json"));
    EXPECT_EQ(run["records"].size(), 200u);
    EXPECT_TRUE(run["run"]["params_calibrated"].get<bool>());
}

TEST(Cli, SeedChangesMockOutput) {
    Workspace ws("cli-seed");
    ASSERT_EQ(ws.run("--mock --seed 7 verify --method cot --output s7.json").status, 0);
    ASSERT_EQ(ws.run("--mock --seed 8 verify --method cot --output s8.json").status, 0);
    EXPECT_NE(slurp(ws.out / "s7.json"), slurp(ws.out / "s8.json"));
}
