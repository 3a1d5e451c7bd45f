#pragma once
// Run configuration: one JSON file, unknown keys rejected, ${VAR} expanded
// from the environment, relative paths resolved against the config's folder.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "verirag/audit_pipeline.hpp"
#include "verirag/baselines.hpp"
#include "verirag/calibration.hpp"
#include "verirag/corpus_store.hpp"
#include "verirag/error.hpp"
#include "verirag/hv_score.hpp"
#include "verirag/io.hpp"
#include "verirag/llm_client.hpp"
#include "verirag/redundancy.hpp"
#include "verirag/threshold.hpp"

namespace verirag {

struct AblationFlags {
    bool use_hv_score = true;
    bool use_dynamic_threshold = true;
    bool use_redundancy_penalty = true;

    bool operator==(const AblationFlags&) const = default;
};

struct PathsConfig {
    std::filesystem::path manifest;
    std::filesystem::path params;
    std::filesystem::path prompts;
    std::filesystem::path output = "out";
    std::filesystem::path calibration;
    std::filesystem::path embeddings;  // defaults to <output>/embeddings.jsonl
    std::filesystem::path transcript;  // scripted chat responses, optional
};

struct EmbedderConfig {
    std::string kind = "hash"; // hash | http
    std::size_t dim = 256;
    std::string model;
    std::size_t batch_size = 32;
};

struct RunConfig {
    PathsConfig paths;
    HvParams hv;
    ThresholdConfig threshold;
    Grid grid = Grid::defaults();
    double ridge_gamma = 1.0;
    LlmSettings llm;
    int llm_max_attempts = 3;
    EmbedderConfig embedder;
    int retrieval_k = 10;
    TokenizerOptions tokenizer;
    AblationFlags ablation;
    MockAuditOptions mock_audit;
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::vector<ScenarioLabel> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
    std::uint64_t seed = 0;
    unsigned threads = 0; // 0 = hardware concurrency

    std::filesystem::path embeddings_path() const {
        return paths.embeddings.empty() ? paths.output / "embeddings.jsonl" : paths.embeddings;
    }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

// Expands ${NAME}; an unset variable expands to the empty string.
inline std::string interpolate_env(std::string_view s, const EnvLookup& env) {
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto open = s.find("${", pos);
        if (open == std::string_view::npos) {
            out.append(s.substr(pos));
            break;
        }
        const auto close = s.find('}', open + 2);
        if (close == std::string_view::npos) throw ConfigError("config: unterminated ${ in '" + std::string(s) + "'");
        out.append(s.substr(pos, open - pos));
        const std::string name(s.substr(open + 2, close - open - 2));
        if (name.empty()) throw ConfigError("config: empty ${} reference");
        out.append(env(name).value_or(""));
        pos = close + 1;
    }
    return out;
}

namespace detail {

inline void expand_strings(json& j, const EnvLookup& env) {
    if (j.is_string()) {
        j = interpolate_env(j.get<std::string>(), env);
    } else if (j.is_structured()) {
        for (auto& v : j) expand_strings(v, env);
    }
}

class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
    }

    // Throws on any key not in `known`.
    void only(std::initializer_list<const char*> known) const {
        std::set<std::string> k(known.begin(), known.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!k.contains(it.key()))
                throw ConfigError("config: unknown key '" + (name_.empty() ? "" : name_ + ".") + it.key() + "'");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }
    std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

    template <class T>
    void get(const char* key, T& out) const {
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config: '" + path(key) + "' has the wrong type");
        }
    }

private:
    const json& j_;
    std::string name_;
};

inline std::vector<double> grid_axis(const json& j, const std::string& where) {
    if (j.is_array()) return j.get<std::vector<double>>();
    Section s(j, where);
    s.only({"start", "stop", "step"});
    double start = 0, stop = 0, step = 0;
    s.get("start", start);
    s.get("stop", stop);
    s.get("step", step);
    return Grid::range(start, stop, step);
}

} // namespace detail

inline RunConfig parse_run_config(json j, const std::filesystem::path& base_dir, const EnvLookup& env = process_env) {
    using detail::Section;
    detail::expand_strings(j, env);
    RunConfig cfg;
    Section root(j, "");
    root.only({"paths", "hv", "threshold", "grid", "ridge", "llm", "embedder", "retrieval", "tokenizer", "ablation",
               "mock_audit", "methods", "scenarios", "seed", "threads"});

    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        if (p.empty()) return {};
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    if (root.has("paths")) {
        Section s(root.at("paths"), "paths");
        s.only({"manifest", "params", "prompts", "output", "calibration", "embeddings", "transcript"});
        auto set = [&](const char* key, std::filesystem::path& out) {
            std::string v;
            s.get(key, v);
            if (s.has(key)) out = resolve(v);
        };
        set("manifest", cfg.paths.manifest);
        set("params", cfg.paths.params);
        set("prompts", cfg.paths.prompts);
        set("output", cfg.paths.output);
        set("calibration", cfg.paths.calibration);
        set("embeddings", cfg.paths.embeddings);
        set("transcript", cfg.paths.transcript);
    }
    if (cfg.paths.output.is_relative()) cfg.paths.output = base_dir / cfg.paths.output;

    if (root.has("hv")) {
        Section s(root.at("hv"), "hv");
        s.only({"alpha", "lambda"});
        s.get("alpha", cfg.hv.alpha);
        s.get("lambda", cfg.hv.lambda);
    }
    if (root.has("threshold")) {
        Section s(root.at("threshold"), "threshold");
        s.only({"priors", "scaling", "n_base", "clamp"});
        if (s.has("priors")) {
            Section p(s.at("priors"), "threshold.priors");
            p.only({"SettledScience", "RobustStudy", "PlausibleEvidence"});
            for (RequiredStandard r : kAllStandards) {
                const std::string key = to_key(r);
                p.get(key.c_str(), cfg.threshold.priors[r]);
            }
        }
        s.get("scaling", cfg.threshold.scaling);
        s.get("n_base", cfg.threshold.n_base);
        if (s.has("clamp")) {
            std::vector<double> c;
            s.get("clamp", c);
            if (c.size() != 2) throw ConfigError("config: 'threshold.clamp' must be [lo, hi]");
            cfg.threshold.clamp_lo = c[0];
            cfg.threshold.clamp_hi = c[1];
        }
    }
    if (root.has("grid")) {
        Section s(root.at("grid"), "grid");
        s.only({"alpha", "lambda"});
        if (s.has("alpha")) cfg.grid.alpha_values = detail::grid_axis(s.at("alpha"), "grid.alpha");
        if (s.has("lambda")) cfg.grid.lambda_values = detail::grid_axis(s.at("lambda"), "grid.lambda");
    }
    if (root.has("ridge")) {
        Section s(root.at("ridge"), "ridge");
        s.only({"gamma"});
        s.get("gamma", cfg.ridge_gamma);
    }

    cfg.llm.base_url = env("LLM_BASE_URL").value_or("");
    cfg.llm.model = env("LLM_MODEL").value_or("");
    cfg.llm.api_key = env("LLM_API_KEY").value_or("");
    if (root.has("llm")) {
        Section s(root.at("llm"), "llm");
        s.only({"base_url", "model", "api_key", "max_in_flight", "max_attempts", "backoff_ms", "timeout_ms",
                "token_budget", "json_mode"});
        auto non_empty = [&](const char* key, std::string& out) {
            std::string v;
            s.get(key, v);
            if (!v.empty()) out = v;
        };
        non_empty("base_url", cfg.llm.base_url);
        non_empty("model", cfg.llm.model);
        non_empty("api_key", cfg.llm.api_key);
        s.get("max_in_flight", cfg.llm.max_in_flight);
        s.get("max_attempts", cfg.llm_max_attempts);
        cfg.llm.retry.max_attempts = cfg.llm_max_attempts;
        long long ms = -1;
        s.get("backoff_ms", ms);
        if (ms >= 0) cfg.llm.retry.base_backoff = std::chrono::milliseconds(ms);
        ms = -1;
        s.get("timeout_ms", ms);
        if (ms >= 0) cfg.llm.retry.timeout = std::chrono::milliseconds(ms);
        s.get("token_budget", cfg.llm.token_budget);
        s.get("json_mode", cfg.llm.json_mode);
    }
    if (cfg.llm.base_url.empty()) cfg.llm.base_url = "https://api.openai.com/v1";

    if (root.has("embedder")) {
        Section s(root.at("embedder"), "embedder");
        s.only({"kind", "dim", "model", "batch_size"});
        s.get("kind", cfg.embedder.kind);
        s.get("dim", cfg.embedder.dim);
        s.get("model", cfg.embedder.model);
        s.get("batch_size", cfg.embedder.batch_size);
    }
    if (root.has("retrieval")) {
        Section s(root.at("retrieval"), "retrieval");
        s.only({"k"});
        s.get("k", cfg.retrieval_k);
    }
    if (root.has("tokenizer")) {
        Section s(root.at("tokenizer"), "tokenizer");
        s.only({"min_length"});
        s.get("min_length", cfg.tokenizer.min_length);
    }
    if (root.has("ablation")) {
        Section s(root.at("ablation"), "ablation");
        s.only({"use_hv_score", "use_dynamic_threshold", "use_redundancy_penalty"});
        s.get("use_hv_score", cfg.ablation.use_hv_score);
        s.get("use_dynamic_threshold", cfg.ablation.use_dynamic_threshold);
        s.get("use_redundancy_penalty", cfg.ablation.use_redundancy_penalty);
    }
    if (root.has("mock_audit")) {
        Section s(root.at("mock_audit"), "mock_audit");
        s.only({"pass", "uncertain", "fail", "supports", "refutes", "neutral"});
        s.get("pass", cfg.mock_audit.pass);
        s.get("uncertain", cfg.mock_audit.uncertain);
        s.get("fail", cfg.mock_audit.fail);
        s.get("supports", cfg.mock_audit.supports);
        s.get("refutes", cfg.mock_audit.refutes);
        s.get("neutral", cfg.mock_audit.neutral);
    }
    if (root.has("methods")) {
        std::vector<std::string> names;
        root.get("methods", names);
        cfg.methods.clear();
        for (const auto& n : names) {
            auto m = parse_method(n);
            if (!m) throw ConfigError("config: unknown method '" + n + "'");
            cfg.methods.push_back(*m);
        }
    }
    if (root.has("scenarios")) {
        std::vector<std::string> names;
        root.get("scenarios", names);
        cfg.scenarios.clear();
        for (const auto& n : names) {
            auto l = parse_scenario(n);
            if (!l) throw ConfigError("config: unknown scenario '" + n + "'");
            cfg.scenarios.push_back(*l);
        }
    }
    root.get("seed", cfg.seed);
    root.get("threads", cfg.threads);

    cfg.hv.validate();
    cfg.threshold.validate();
    cfg.grid.validate();
    if (!(cfg.ridge_gamma >= 0.0)) throw ConfigError("config: ridge.gamma must be >= 0");
    if (cfg.retrieval_k <= 0) throw ConfigError("config: retrieval.k must be positive");
    if (cfg.embedder.kind != "hash" && cfg.embedder.kind != "http")
        throw ConfigError("config: embedder.kind must be 'hash' or 'http'");
    if (cfg.embedder.dim == 0) throw ConfigError("config: embedder.dim must be positive");
    if (cfg.llm_max_attempts < 1) throw ConfigError("config: llm.max_attempts must be >= 1");
    for (const auto& p : {cfg.paths.manifest, cfg.paths.prompts, cfg.paths.transcript})
        if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError("config: path does not exist: " + p.string());
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path, const EnvLookup& env = process_env) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_run_config(std::move(j), std::filesystem::absolute(path).parent_path(), env);
}

// ---------------------------------------------------------------------------
// params.json
// ---------------------------------------------------------------------------

struct ModelParams {
    HvParams hv;
    RidgeModel ridge;
    bool calibrated = false;
};

inline json to_json(const ModelParams& p) {
    json w = json::array();
    for (double x : p.ridge.weights) w.push_back(round_sig(x));
    return {{"alpha", round_sig(p.hv.alpha)},
            {"lambda", round_sig(p.hv.lambda)},
            {"ridge", {{"weights", w}, {"intercept", round_sig(p.ridge.intercept)}, {"gamma", p.ridge.gamma}}}};
}

inline ModelParams params_from_json(const json& j) {
    detail::Section root(j, "params");
    root.only({"alpha", "lambda", "ridge", "calibration"});
    ModelParams p;
    p.calibrated = true;
    root.get("alpha", p.hv.alpha);
    root.get("lambda", p.hv.lambda);
    if (root.has("ridge")) {
        detail::Section r(root.at("ridge"), "params.ridge");
        r.only({"weights", "intercept", "gamma"});
        r.get("weights", p.ridge.weights);
        r.get("intercept", p.ridge.intercept);
        r.get("gamma", p.ridge.gamma);
        if (p.ridge.weights.size() != kFeatureDim)
            throw ConfigError("params: ridge.weights must have " + std::to_string(kFeatureDim) + " entries");
    }
    p.hv.validate();
    return p;
}

// Calibrated params when the file exists, else config defaults with an
// uncalibrated ridge model.
inline ModelParams load_params(const RunConfig& cfg) {
    if (!cfg.paths.params.empty() && std::filesystem::exists(cfg.paths.params)) {
        std::ifstream in(cfg.paths.params);
        try {
            return params_from_json(json::parse(in));
        } catch (const json::parse_error& e) {
            throw ConfigError("params " + cfg.paths.params.string() + ": " + e.what());
        }
    }
    ModelParams p;
    p.hv = cfg.hv;
    p.ridge.gamma = cfg.ridge_gamma;
    return p;
}

} // namespace verirag
