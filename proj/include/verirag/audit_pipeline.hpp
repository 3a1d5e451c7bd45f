#pragma once
// Batch methodological audit: request assembly, prompt rendering with a token
// budget, strict response parsing, the restricted JSONPath applicability
// query, and a deterministic offline auditor.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"
#include "verirag/hash.hpp"
#include "verirag/llm_client.hpp"
#include "verirag/prompts.hpp"

namespace verirag {

struct PaperToAudit {
    std::string paper_id;
    AnalysisDocument analysis;
    std::vector<std::string> evidence_text_chunks;
};

struct AuditRequest {
    std::string claim_text;
    std::vector<PaperToAudit> papers;

    void validate() const {
        if (papers.empty()) throw PreconditionError("audit request has no papers");
        std::set<std::string> ids;
        for (const auto& p : papers) {
            if (p.evidence_text_chunks.empty())
                throw PreconditionError("audit request: paper " + p.paper_id + " carries no evidence chunks");
            if (!ids.insert(p.paper_id).second)
                throw PreconditionError("audit request: duplicate paper " + p.paper_id);
        }
    }
};

struct AuditResult {
    std::string paper_id;
    Stance stance = Stance::Neutral;
    AuditVector audit;

    bool operator==(const AuditResult&) const = default;
};

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

inline json papers_to_audit_json(const AuditRequest& req) {
    json arr = json::array();
    for (const auto& p : req.papers)
        arr.push_back({{"paper_id", p.paper_id},
                       {"paper_json_content", to_json(p.analysis)},
                       {"evidence_text_chunks", p.evidence_text_chunks}});
    return arr;
}

// Checks applicable to at least one paper, in check order.
inline std::vector<CheckId> applicable_union(const AuditRequest& req) {
    std::vector<CheckId> out;
    for (CheckId id : kAllChecks)
        for (const auto& p : req.papers)
            if (derive_mask(p.analysis).applicable(id)) {
                out.push_back(id);
                break;
            }
    return out;
}

inline std::string render_audit_prompt(const AuditRequest& req, const PromptLibrary& prompts) {
    return prompts.render(PromptId::BatchAudit,
                          {{"claim_text", req.claim_text},
                           {"check_definitions", prompts.check_definitions(applicable_union(req))},
                           {"papers_to_audit", papers_to_audit_json(req).dump(2)}});
}

// Renders the batch audit prompt. With a budget, an oversized prompt raises
// PromptTooLargeError listing the papers that exceed the budget on their own.
inline std::string build_audit_prompt(const AuditRequest& req, const PromptLibrary& prompts,
                                      std::optional<std::size_t> token_budget = std::nullopt) {
    req.validate();
    std::string prompt = render_audit_prompt(req, prompts);
    if (token_budget && approx_tokens(prompt) > *token_budget) {
        std::vector<std::string> oversized;
        for (const auto& p : req.papers) {
            AuditRequest solo{req.claim_text, {p}};
            if (approx_tokens(render_audit_prompt(solo, prompts)) > *token_budget) oversized.push_back(p.paper_id);
        }
        std::string msg = "audit prompt exceeds token budget of " + std::to_string(*token_budget);
        if (!oversized.empty()) {
            msg += "; oversized papers:";
            for (const auto& id : oversized) msg += " " + id;
        }
        throw PromptTooLargeError(msg, std::move(oversized));
    }
    return prompt;
}

// Greedy packing of papers, in request order, into batches whose prompts fit
// the budget. A paper that cannot fit alone is an error.
inline std::vector<AuditRequest> split_audit_request(const AuditRequest& req, const PromptLibrary& prompts,
                                                     std::size_t token_budget) {
    req.validate();
    std::vector<std::string> oversized;
    for (const auto& p : req.papers)
        if (approx_tokens(render_audit_prompt({req.claim_text, {p}}, prompts)) > token_budget)
            oversized.push_back(p.paper_id);
    if (!oversized.empty()) {
        std::string msg = "papers exceed the audit token budget on their own:";
        for (const auto& id : oversized) msg += " " + id;
        throw PromptTooLargeError(msg, std::move(oversized));
    }

    std::vector<AuditRequest> batches;
    AuditRequest cur{req.claim_text, {}};
    for (const auto& p : req.papers) {
        cur.papers.push_back(p);
        if (cur.papers.size() > 1 && approx_tokens(render_audit_prompt(cur, prompts)) > token_budget) {
            cur.papers.pop_back();
            batches.push_back(std::move(cur));
            cur = AuditRequest{req.claim_text, {p}};
        }
    }
    batches.push_back(std::move(cur));
    return batches;
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

inline std::optional<double> parse_check_score(std::string_view label) {
    const std::string k = detail::squash(label);
    if (k == "pass") return kPass;
    if (k == "uncertain") return kUncertain;
    if (k == "fail") return kFail;
    return std::nullopt;
}

inline std::string score_label(double s) {
    if (s == kPass) return "Pass";
    if (s == kUncertain) return "Uncertain";
    return "Fail";
}

struct ParsedAudit {
    std::vector<AuditResult> results; // request order
    std::vector<std::string> warnings;
};

// Strict structural validation. Unknown paper ids and scores on inapplicable
// checks are dropped with a warning; anything else malformed is a ParseError.
inline ParsedAudit parse_audit_response(std::string_view raw, const AuditRequest& req) {
    const json root = parse_json_reply(raw);
    auto arr_it = root.find("all_papers_audit");
    if (arr_it == root.end() || !arr_it->is_array()) throw ParseError("response lacks an 'all_papers_audit' array");

    std::map<std::string, const PaperToAudit*> requested;
    for (const auto& p : req.papers) requested.emplace(p.paper_id, &p);

    ParsedAudit out;
    std::map<std::string, AuditResult> by_id;
    for (const json& entry : *arr_it) {
        if (!entry.is_object()) throw ParseError("audit entry is not an object");
        auto pid = entry.find("paper_id");
        if (pid == entry.end() || !pid->is_string()) throw ParseError("audit entry without a string paper_id");
        const std::string id = pid->get<std::string>();
        auto req_it = requested.find(id);
        if (req_it == requested.end()) {
            out.warnings.push_back("dropped audit for unknown paper_id '" + id + "'");
            continue;
        }
        if (by_id.contains(id)) throw ParseError("duplicate audit for paper_id '" + id + "'");

        auto st = entry.find("stance");
        if (st == entry.end() || !st->is_string()) throw ParseError("paper " + id + ": missing stance");
        const auto stance = parse_stance(st->get<std::string>());
        if (!stance) throw ParseError("paper " + id + ": unknown stance '" + st->get<std::string>() + "'");

        auto checks = entry.find("checks");
        if (checks == entry.end() || !checks->is_object()) throw ParseError("paper " + id + ": missing checks object");
        AuditVector raw_audit;
        for (auto c = checks->begin(); c != checks->end(); ++c) {
            const auto cid = parse_check_id(c.key());
            if (!cid) throw ParseError("paper " + id + ": unknown check '" + c.key() + "'");
            if (!c->is_object() || !c->contains("score") || !(*c)["score"].is_string())
                throw ParseError("paper " + id + ", " + c.key() + ": expected {score, reasoning}");
            const auto score = parse_check_score((*c)["score"].get<std::string>());
            if (!score)
                throw ParseError("paper " + id + ", " + c.key() + ": score must be Pass, Fail or Uncertain");
            raw_audit.scores[*cid] = *score;
            if (c->contains("reasoning") && (*c)["reasoning"].is_string())
                raw_audit.reasoning[*cid] = (*c)["reasoning"].get<std::string>();
        }

        const ApplicabilityMask mask = derive_mask(req_it->second->analysis);
        CheckedAudit checked = validate_audit(raw_audit, mask);
        for (CheckId d : checked.dropped)
            out.warnings.push_back("paper " + id + ": dropped score for inapplicable check " + to_string(d));
        by_id.emplace(id, AuditResult{id, *stance, std::move(checked.audit)});
    }

    for (const auto& p : req.papers) {
        auto it = by_id.find(p.paper_id);
        if (it == by_id.end()) throw ParseError("response has no audit for paper '" + p.paper_id + "'");
        out.results.push_back(std::move(it->second));
    }
    return out;
}

// Inverse of parse_audit_response for well-formed results.
inline std::string render_audit_response(const std::vector<AuditResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        json checks = json::object();
        for (const auto& [id, score] : r.audit.scores) {
            auto reason = r.audit.reasoning.find(id);
            checks[to_string(id)] = {{"score", score_label(score)},
                                     {"reasoning", reason != r.audit.reasoning.end() ? reason->second : ""}};
        }
        arr.push_back({{"paper_id", r.paper_id}, {"stance", to_string(r.stance)}, {"checks", std::move(checks)}});
    }
    return json{{"all_papers_audit", std::move(arr)}}.dump();
}

// ---------------------------------------------------------------------------
// Applicability filter
// ---------------------------------------------------------------------------

// Supports exactly `$.veritable_check_signals.<CheckId>.is_applicable`.
inline bool applicability_query(const AnalysisDocument& analysis, std::string_view path) {
    constexpr std::string_view prefix = "$.veritable_check_signals.";
    constexpr std::string_view suffix = ".is_applicable";
    if (!path.starts_with(prefix) || !path.ends_with(suffix) || path.size() <= prefix.size() + suffix.size())
        throw PreconditionError("unsupported applicability path '" + std::string(path) + "'");
    const std::string_view key = path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
    const auto id = parse_check_id(key);
    if (!id || key.front() != 'C') throw PreconditionError("unsupported applicability path '" + std::string(path) + "'");
    auto it = analysis.veritable_check_signals.find(*id);
    if (it == analysis.veritable_check_signals.end())
        throw SchemaError("analysis document is missing check entry " + to_string(*id));
    return it->second.is_applicable;
}

inline std::string applicability_path(CheckId id) {
    return "$.veritable_check_signals." + to_string(id) + ".is_applicable";
}

// ---------------------------------------------------------------------------
// Offline auditor
// ---------------------------------------------------------------------------

// Relative frequencies of drawn scores and stances.
struct MockAuditOptions {
    double pass = 0.6;
    double uncertain = 0.15;
    double fail = 0.25;
    double supports = 0.4;
    double refutes = 0.35;
    double neutral = 0.25;
};

namespace detail {
template <class T, std::size_t N>
T weighted_pick(SplitMix64& rng, const std::array<double, N>& weights, const std::array<T, N>& values) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < N; ++i) {
        if (u < weights[i]) return values[i];
        u -= weights[i];
    }
    return values[N - 1];
}
} // namespace detail

// Deterministic in (seed, FNV-1a(claim text), FNV-1a(paper id)); only
// applicable checks are scored.
inline std::vector<AuditResult> mock_audit(const AuditRequest& req, std::uint64_t seed,
                                           const MockAuditOptions& opts = {}) {
    std::vector<AuditResult> out;
    const std::uint64_t claim_hash = fnv1a64(req.claim_text);
    for (const auto& p : req.papers) {
        SplitMix64 rng(hash_combine(hash_combine(seed, claim_hash), fnv1a64(p.paper_id)));
        AuditResult r;
        r.paper_id = p.paper_id;
        r.stance = detail::weighted_pick<Stance, 3>(rng, {opts.supports, opts.refutes, opts.neutral},
                                                    {Stance::Supports, Stance::Refutes, Stance::Neutral});
        const ApplicabilityMask mask = derive_mask(p.analysis);
        for (CheckId id : mask.applicable_checks()) {
            const double s = detail::weighted_pick<double, 3>(rng, {opts.pass, opts.uncertain, opts.fail},
                                                              {kPass, kUncertain, kFail});
            r.audit.scores[id] = s;
            r.audit.reasoning[id] = "mock " + score_label(s);
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Auditors
// ---------------------------------------------------------------------------

struct AuditOutcome {
    std::vector<AuditResult> results;
    TokenUsage tokens;
    int attempts = 0;
    std::vector<std::string> warnings;
};

class AuditFailedError : public std::runtime_error {
public:
    AuditFailedError(const std::string& what, int attempts) : std::runtime_error(what), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class Auditor {
public:
    virtual ~Auditor() = default;
    virtual AuditOutcome audit(const AuditRequest& req) = 0;
};

// Sends the batch prompt (split only when over budget) and retries malformed
// replies up to max_attempts times per batch.
class LlmAuditor : public Auditor {
public:
    LlmAuditor(ChatModel& model, const PromptLibrary& prompts, std::size_t token_budget, int max_attempts = 3)
        : model_(model), prompts_(prompts), budget_(token_budget), max_attempts_(max_attempts) {}

    AuditOutcome audit(const AuditRequest& req) override {
        AuditOutcome out;
        for (const auto& batch : split_audit_request(req, prompts_, budget_)) {
            ChatRequest chat{"batch_audit", build_audit_prompt(batch, prompts_), json::object()};
            int attempts = 0;
            auto parsed = ask_with_retries(
                model_, chat, max_attempts_, out.tokens,
                [&](const std::string& text) { return parse_audit_response(text, batch); }, &attempts);
            out.attempts += attempts;
            if (!parsed)
                throw AuditFailedError("audit failed after " + std::to_string(attempts) + " attempts", out.attempts);
            for (auto& r : parsed->results) out.results.push_back(std::move(r));
            for (auto& w : parsed->warnings) out.warnings.push_back(std::move(w));
        }
        return out;
    }

private:
    ChatModel& model_;
    const PromptLibrary& prompts_;
    std::size_t budget_;
    int max_attempts_;
};

// Offline auditor. Token counts are the approximate cost of the prompt it
// would have sent and the response it produced.
class MockAuditor : public Auditor {
public:
    MockAuditor(std::uint64_t seed, const PromptLibrary* prompts = nullptr, MockAuditOptions opts = {})
        : seed_(seed), prompts_(prompts), opts_(opts) {}

    AuditOutcome audit(const AuditRequest& req) override {
        req.validate();
        AuditOutcome out;
        out.results = mock_audit(req, seed_, opts_);
        out.attempts = 1;
        const std::string prompt = prompts_ ? build_audit_prompt(req, *prompts_) : std::string();
        out.tokens = count_tokens(prompt, render_audit_response(out.results));
        return out;
    }

private:
    std::uint64_t seed_;
    const PromptLibrary* prompts_;
    MockAuditOptions opts_;
};

} // namespace verirag
