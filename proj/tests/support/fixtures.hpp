#pragma once
// Builders for analyses, tiny corpora and scratch directories, plus a
// helper that runs the CLI binary.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "verirag/core_model.hpp"

namespace vtest {

namespace fs = std::filesystem;
using nlohmann::json;

inline verirag::AnalysisDocument make_analysis(const std::vector<verirag::CheckId>& applicable) {
    verirag::AnalysisDocument a;
    a.global_integrity_signals = {"disclosed", "none declared", "on request"};
    for (auto id : verirag::kAllChecks) a.veritable_check_signals[id] = {false, "N/A"};
    for (auto id : applicable) a.veritable_check_signals[id] = {true, "observed"};
    return a;
}

inline verirag::AnalysisDocument make_analysis_all() {
    return make_analysis({verirag::kAllChecks.begin(), verirag::kAllChecks.end()});
}

inline json claim_json(const std::string& id, const std::string& text, const std::string& gt = "Valid") {
    return {{"id", id},
            {"claim_text", text},
            {"claim_type", "simple"},
            {"topic", "Nutrition"},
            {"specificity_rating", 6},
            {"testability_rating", 7},
            {"evidence_confidence_criteria", "Robust Study"},
            {"ciber_probe_questions", {"Does the evidence agree?", "Does any study conflict?", "Restated, is it so?"}},
            {"ground_truth", gt}};
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << s;
}

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("verirag-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

// Config pointing at the shipped fixture with outputs in `out`.
inline json fixture_config(const fs::path& out) {
    json cfg = json::parse(slurp(fs::path(VERIRAG_FIXTURE_DIR) / "config.json"));
    const fs::path fx = VERIRAG_FIXTURE_DIR;
    cfg["paths"]["manifest"] = (fx / "manifest.json").string();
    cfg["paths"]["calibration"] = (fx / "calibration.jsonl").string();
    cfg["paths"]["output"] = out.string();
    return cfg;
}

struct CliResult {
    int status = -1;
    std::string output; // stdout and stderr interleaved
};

// Runs the CLI with `args`, optional leading environment assignments.
inline CliResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = (env.empty() ? "" : env + " ") + "'" + std::string(VERIRAG_CLI) + "' " + args + " 2>&1";
    CliResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int st = ::pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

} // namespace vtest
