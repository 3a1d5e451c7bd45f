#pragma once
// Provider-agnostic chat interface, an OpenAI-compatible HTTP client with
// timeouts, retries and an in-flight cap, plus two offline doubles: a scripted
// transcript keyed by prompt fingerprint and a seeded mock.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
// <resolv.h> defines _res as a macro; Eigen uses it as a parameter name.
#ifdef _res
#undef _res
#endif
#include <json.hpp>

#include "verirag/error.hpp"
#include "verirag/hash.hpp"
#include "verirag/prompts.hpp"

namespace verirag {

using json = nlohmann::json;

struct ChatRequest {
    std::string task;   // response schema label, e.g. "cot", "batch_audit"
    std::string prompt;
    json hints = json::object(); // structured context for offline doubles; never sent to a provider
};

struct ChatResponse {
    std::string text;
    std::optional<std::size_t> prompt_tokens;
    std::optional<std::size_t> completion_tokens;
};

class ChatModel {
public:
    virtual ~ChatModel() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Token accounting
// ---------------------------------------------------------------------------

struct TokenUsage {
    std::size_t in = 0;
    std::size_t out = 0;
    bool approximate = false;

    std::size_t total() const noexcept { return in + out; }

    TokenUsage& operator+=(const TokenUsage& o) {
        in += o.in;
        out += o.out;
        approximate = approximate || o.approximate;
        return *this;
    }
};

constexpr std::size_t approx_tokens(std::string_view text) noexcept { return (text.size() + 3) / 4; }

// Provider counts when both are reported, else ceil(bytes / 4) per side.
inline TokenUsage count_tokens(std::string_view prompt, std::string_view response,
                               std::optional<std::size_t> provider_in = std::nullopt,
                               std::optional<std::size_t> provider_out = std::nullopt) {
    if (provider_in && provider_out) return {*provider_in, *provider_out, false};
    return {approx_tokens(prompt), approx_tokens(response), true};
}

inline TokenUsage count_tokens(const ChatRequest& req, const ChatResponse& resp) {
    return count_tokens(req.prompt, resp.text, resp.prompt_tokens, resp.completion_tokens);
}

// 16 hex digits of FNV-1a over the prompt bytes.
inline std::string prompt_fingerprint(std::string_view prompt) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(prompt)));
    return buf;
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{1000}; // doubles after each failed attempt
    std::chrono::milliseconds timeout{60000};
};

struct Endpoint {
    std::string scheme_host_port; // "https://host:443"
    std::string path_prefix;      // "/v1"
};

inline Endpoint parse_base_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw ConfigError("LLM base URL needs a scheme: " + std::string(url));
    const auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.scheme_host_port = std::string(url.substr(0, path_start));
    if (path_start != std::string_view::npos) ep.path_prefix = std::string(url.substr(path_start));
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
    return ep;
}

// POSTs JSON with retries on transport failures, 429 and 5xx. Other HTTP
// errors fail immediately. Thread-safe; each attempt uses a fresh connection.
class JsonPoster {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    JsonPoster(std::string base_url, std::string api_key, RetryPolicy policy, std::size_t max_in_flight,
               Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
        : endpoint_(parse_base_url(base_url)),
          api_key_(std::move(api_key)),
          policy_(policy),
          slots_(std::make_unique<std::counting_semaphore<4096>>(
              static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(max_in_flight, 1, 4096)))),
          sleeper_(std::move(sleeper)) {}

    json post(const std::string& path, const json& body) const {
        const std::string payload = body.dump();
        std::string last_error;
        auto backoff = policy_.base_backoff;
        for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
            if (attempt > 1) {
                sleeper_(backoff);
                backoff *= 2;
            }
            slots_->acquire();
            httplib::Result res = [&] {
                httplib::Client cli(endpoint_.scheme_host_port);
                const auto secs = std::chrono::duration_cast<std::chrono::seconds>(policy_.timeout);
                const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(policy_.timeout - secs);
                cli.set_connection_timeout(secs.count(), usecs.count());
                cli.set_read_timeout(secs.count(), usecs.count());
                cli.set_write_timeout(secs.count(), usecs.count());
                httplib::Headers headers;
                if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
                return cli.Post(endpoint_.path_prefix + path, headers, payload, "application/json");
            }();
            slots_->release();

            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            if (res->status < 200 || res->status >= 300)
                throw TransportError("HTTP " + std::to_string(res->status) + " from " + path + ": " + res->body);
            try {
                return json::parse(res->body);
            } catch (const json::parse_error&) {
                last_error = "non-JSON body from " + path;
            }
        }
        throw TransportError(path + " failed after " + std::to_string(policy_.max_attempts) +
                             " attempts: " + last_error);
    }

private:
    Endpoint endpoint_;
    std::string api_key_;
    RetryPolicy policy_;
    std::unique_ptr<std::counting_semaphore<4096>> slots_;
    Sleeper sleeper_;
};

struct LlmSettings {
    std::string base_url;
    std::string model;
    std::string api_key;
    std::size_t max_in_flight = 4;
    RetryPolicy retry;
    bool json_mode = true; // request structured output when the provider supports it
    std::size_t token_budget = 100000;
};

// /chat/completions client.
class HttpChatModel : public ChatModel {
public:
    explicit HttpChatModel(LlmSettings settings, JsonPoster::Sleeper sleeper = {})
        : settings_(checked(std::move(settings))),
          poster_(settings_.base_url, settings_.api_key, settings_.retry, settings_.max_in_flight,
                  sleeper ? std::move(sleeper)
                          : JsonPoster::Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })) {}

    ChatResponse complete(const ChatRequest& request) override {
        json body = {{"model", settings_.model},
                     {"temperature", 0},
                     {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})}};
        if (settings_.json_mode) body["response_format"] = {{"type", "json_object"}};
        const json reply = poster_.post("/chat/completions", body);

        ChatResponse out;
        try {
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("chat completion without message content: ") + e.what());
        }
        if (auto u = reply.find("usage"); u != reply.end() && u->is_object()) {
            if (u->contains("prompt_tokens") && (*u)["prompt_tokens"].is_number_unsigned())
                out.prompt_tokens = (*u)["prompt_tokens"].get<std::size_t>();
            if (u->contains("completion_tokens") && (*u)["completion_tokens"].is_number_unsigned())
                out.completion_tokens = (*u)["completion_tokens"].get<std::size_t>();
        }
        return out;
    }

private:
    static LlmSettings checked(LlmSettings s) {
        if (s.api_key.empty()) throw ConfigError("LLM_API_KEY is not set");
        if (s.model.empty()) throw ConfigError("LLM model is not set (LLM_MODEL)");
        if (s.base_url.empty()) throw ConfigError("LLM base URL is not set (LLM_BASE_URL)");
        return s;
    }

    LlmSettings settings_;
    JsonPoster poster_;
};

// ---------------------------------------------------------------------------
// Offline doubles
// ---------------------------------------------------------------------------

// Transcript file: {"<fingerprint>": "<response text>"} or
// {"<fingerprint>": {"text": "...", "prompt_tokens": n, "completion_tokens": m}}.
class ScriptedChatModel : public ChatModel {
public:
    explicit ScriptedChatModel(std::map<std::string, ChatResponse> script) : script_(std::move(script)) {}

    static ScriptedChatModel from_json(const json& j) {
        if (!j.is_object()) throw SchemaError("transcript: expected an object keyed by prompt fingerprint");
        std::map<std::string, ChatResponse> script;
        for (auto it = j.begin(); it != j.end(); ++it) {
            ChatResponse r;
            if (it->is_string()) {
                r.text = it->get<std::string>();
            } else if (it->is_object() && it->contains("text")) {
                r.text = (*it)["text"].get<std::string>();
                if (it->contains("prompt_tokens")) r.prompt_tokens = (*it)["prompt_tokens"].get<std::size_t>();
                if (it->contains("completion_tokens"))
                    r.completion_tokens = (*it)["completion_tokens"].get<std::size_t>();
            } else {
                throw SchemaError("transcript: entry " + it.key() + " must be a string or {text: ...}");
            }
            script.emplace(it.key(), std::move(r));
        }
        return ScriptedChatModel(std::move(script));
    }

    static ScriptedChatModel load(const std::filesystem::path& path) {
        return from_json(json::parse(read_text_file(path)));
    }

    ChatResponse complete(const ChatRequest& request) override {
        const std::string fp = prompt_fingerprint(request.prompt);
        auto it = script_.find(fp);
        if (it == script_.end())
            throw TransportError("no scripted response for prompt fingerprint " + fp + " (task " + request.task + ")");
        return it->second;
    }

private:
    std::map<std::string, ChatResponse> script_;
};

// Deterministic, schema-valid answers for every baseline task, derived from
// (seed, prompt bytes). Thread-safe.
class MockChatModel : public ChatModel {
public:
    explicit MockChatModel(std::uint64_t seed) : seed_(seed) {}

    ChatResponse complete(const ChatRequest& request) override {
        SplitMix64 rng(hash_combine(seed_, fnv1a64(request.prompt)));
        json body;
        const std::string& task = request.task;
        if (task == "cot" || task == "ciber_probe" || task == "flare_final") {
            body = verdict_body(rng, {"Supports", "Refutes", "Neutral", "Unverifiable"});
        } else if (task == "flare_assess") {
            body = verdict_body(rng, {"Supports", "Refutes", "Neutral", "Unverifiable"});
            body["full_review_paper_id"] = nullptr;
            const json& ids = request.hints.value("paper_ids", json::array());
            if (!ids.empty() && rng.below(2) == 0) body["full_review_paper_id"] = ids[rng.below(ids.size())];
        } else if (task == "selfrag_critique") {
            json critiques = json::array();
            static constexpr std::array<const char*, 4> support = {"Fully Supported", "Partially Supported",
                                                                   "No Support", "Contradicts"};
            for (const auto& id : request.hints.value("passage_ids", json::array())) {
                critiques.push_back({{"passage_id", id},
                                     {"relevance", rng.below(4) == 0 ? "Irrelevant" : "Relevant"},
                                     {"support", support[rng.below(support.size())]},
                                     {"note", "mock critique"}});
            }
            body = {{"critiques", std::move(critiques)}};
        } else if (task == "selfrag_synthesis") {
            body = verdict_body(rng, {"Valid", "Invalid", "Unverifiable"});
        } else {
            throw TransportError("mock chat model has no responder for task '" + task + "'");
        }
        return {body.dump(), std::nullopt, std::nullopt};
    }

private:
    static json verdict_body(SplitMix64& rng, std::initializer_list<const char*> labels) {
        const std::vector<const char*> v(labels);
        return {{"verdict", v[rng.below(v.size())]},
                {"confidence", 50 + static_cast<int>(rng.below(46))},
                {"justification", "mock response"}};
    }

    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Response helpers
// ---------------------------------------------------------------------------

// Parses a model reply as a JSON object, tolerating a surrounding ``` fence.
inline json parse_json_reply(std::string_view raw) {
    std::string_view s = raw;
    auto trim = [](std::string_view v) {
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
        while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
        return v;
    };
    s = trim(s);
    if (s.starts_with("```")) {
        const auto nl = s.find('\n');
        const auto end = s.rfind("```");
        if (nl == std::string_view::npos || end <= nl) throw ParseError("unterminated code fence in response");
        s = trim(s.substr(nl + 1, end - nl - 1));
    }
    json j;
    try {
        j = json::parse(s);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("response is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("response must be a JSON object");
    return j;
}

// Calls the model until `parse` succeeds or attempts run out. ParseError and
// TransportError are retried; tokens of every attempt are charged to `usage`.
template <class Parse>
auto ask_with_retries(ChatModel& model, const ChatRequest& request, int max_attempts, TokenUsage& usage,
                      Parse&& parse, int* attempts_used = nullptr)
    -> std::optional<decltype(parse(std::declval<const std::string&>()))> {
    for (int attempt = 1; attempt <= std::max(1, max_attempts); ++attempt) {
        if (attempts_used) *attempts_used = attempt;
        ChatResponse resp;
        try {
            resp = model.complete(request);
        } catch (const TransportError&) {
            continue;
        } catch (const ParseError&) {
            continue;
        }
        usage += count_tokens(request, resp);
        try {
            return parse(resp.text);
        } catch (const ParseError&) {
        } catch (const SchemaError&) {
        }
    }
    return std::nullopt;
}

} // namespace verirag
