#pragma once
// Baseline verification protocols driven through the shared chat interface:
// single-pass chain of thought, critique-then-synthesise, optional full-text
// review, and probe fusion with Dempster's rule.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"
#include "verirag/llm_client.hpp"
#include "verirag/prompts.hpp"

namespace verirag {

enum class Method { VERIRAG, COT, SELFRAG, FLARE, CIBER };

inline constexpr std::array<Method, 5> kAllMethods = {Method::VERIRAG, Method::COT, Method::SELFRAG, Method::FLARE,
                                                      Method::CIBER};

inline std::string to_string(Method m) {
    switch (m) {
    case Method::VERIRAG: return "VERIRAG";
    case Method::COT: return "COT";
    case Method::SELFRAG: return "SELFRAG";
    case Method::FLARE: return "FLARE";
    case Method::CIBER: return "CIBER";
    }
    return {};
}

inline std::optional<Method> parse_method(std::string_view s) {
    const std::string k = detail::squash(s);
    if (k == "verirag") return Method::VERIRAG;
    if (k == "cot" || k == "cotrag") return Method::COT;
    if (k == "selfrag") return Method::SELFRAG;
    if (k == "flare") return Method::FLARE;
    if (k == "ciber") return Method::CIBER;
    return std::nullopt;
}

struct EvidenceSnippet {
    std::string passage_id;
    std::string paper_id;
    std::string text;
};

struct BaselineVerdict {
    Method method = Method::COT;
    Verdict verdict = Verdict::Unverifiable;
    std::string justification;
    TokenUsage tokens;
    int llm_calls = 0;
    std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Dempster-Shafer over the frame {S, R}
// ---------------------------------------------------------------------------

struct MassFunction {
    double m_support = 0.0;
    double m_refute = 0.0;
    double m_theta = 1.0;

    static MassFunction vacuous() { return {}; }

    double total() const noexcept { return m_support + m_refute + m_theta; }
};

// Supports/Valid put c on {S}, Refutes/Invalid put c on {R}; anything else is vacuous.
inline MassFunction to_mass(Verdict v, double confidence) {
    if (!(confidence >= 0.0 && confidence <= 1.0))
        throw PreconditionError("confidence must lie in [0, 1], got " + std::to_string(confidence));
    switch (v) {
    case Verdict::Supports:
    case Verdict::Valid: return {confidence, 0.0, 1.0 - confidence};
    case Verdict::Refutes:
    case Verdict::Invalid: return {0.0, confidence, 1.0 - confidence};
    default: return MassFunction::vacuous();
    }
}

// Dempster's rule; nullopt on total conflict.
inline std::optional<MassFunction> combine(const MassFunction& a, const MassFunction& b) {
    const double conflict = a.m_support * b.m_refute + a.m_refute * b.m_support;
    const double norm = 1.0 - conflict;
    if (norm <= 1e-12) return std::nullopt;
    MassFunction out;
    out.m_support = (a.m_support * b.m_support + a.m_support * b.m_theta + a.m_theta * b.m_support) / norm;
    out.m_refute = (a.m_refute * b.m_refute + a.m_refute * b.m_theta + a.m_theta * b.m_refute) / norm;
    out.m_theta = (a.m_theta * b.m_theta) / norm;
    return out;
}

inline std::optional<MassFunction> fuse_masses(const std::vector<std::pair<Verdict, double>>& verdicts) {
    if (verdicts.empty()) throw PreconditionError("wbu_fuse needs at least one verdict");
    std::optional<MassFunction> acc = to_mass(verdicts.front().first, verdicts.front().second);
    for (std::size_t i = 1; i < verdicts.size() && acc; ++i)
        acc = combine(*acc, to_mass(verdicts[i].first, verdicts[i].second));
    return acc;
}

inline Verdict decide(const MassFunction& m) {
    if (m.m_support - m.m_refute > 1e-9) return Verdict::Supports;
    if (m.m_refute - m.m_support > 1e-9) return Verdict::Refutes;
    return Verdict::Neutral;
}

inline Verdict wbu_fuse(const std::vector<std::pair<Verdict, double>>& verdicts) {
    const auto m = fuse_masses(verdicts);
    return m ? decide(*m) : Verdict::Neutral;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

inline std::string format_snippets(const std::vector<EvidenceSnippet>& snippets) {
    std::string out;
    for (const auto& s : snippets) out += "- (paper " + s.paper_id + ") " + s.text + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string format_snippets_with_ids(const std::vector<EvidenceSnippet>& snippets) {
    std::string out;
    for (const auto& s : snippets) out += "[" + s.passage_id + "] (paper " + s.paper_id + ") " + s.text + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

// Distinct paper ids in first-seen order.
inline std::vector<std::string> snippet_papers(const std::vector<EvidenceSnippet>& snippets) {
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& s : snippets)
        if (seen.insert(s.paper_id).second) ids.push_back(s.paper_id);
    return ids;
}

struct ParsedVerdict {
    Verdict verdict = Verdict::Unverifiable;
    double confidence = 0.5;
    std::string justification;
    json raw;
};

inline double parse_confidence(const json& body) {
    auto it = body.find("confidence");
    if (it == body.end() || it->is_null()) return 0.5;
    double c = 0.0;
    if (it->is_number()) {
        c = it->get<double>();
    } else if (it->is_string()) {
        try {
            c = std::stod(it->get<std::string>());
        } catch (const std::exception&) {
            throw ParseError("confidence is not a number");
        }
    } else {
        throw ParseError("confidence is not a number");
    }
    if (!std::isfinite(c)) throw ParseError("confidence is not finite");
    return std::clamp(c / 100.0, 0.0, 1.0);
}

// `allowed` restricts the labels a given prompt may answer with.
inline ParsedVerdict parse_verdict_reply(std::string_view raw, const std::vector<Verdict>& allowed) {
    ParsedVerdict out;
    out.raw = parse_json_reply(raw);
    auto v = out.raw.find("verdict");
    if (v == out.raw.end() || !v->is_string()) throw ParseError("response lacks a string 'verdict'");
    const auto parsed = parse_verdict(v->get<std::string>());
    if (!parsed || std::find(allowed.begin(), allowed.end(), *parsed) == allowed.end())
        throw ParseError("unexpected verdict '" + v->get<std::string>() + "'");
    out.verdict = *parsed;
    out.confidence = parse_confidence(out.raw);
    if (auto j = out.raw.find("justification"); j != out.raw.end() && j->is_string())
        out.justification = j->get<std::string>();
    return out;
}

// Stance-style prompts also tolerate the binary labels.
inline const std::vector<Verdict> kFourWay = {Verdict::Supports, Verdict::Refutes, Verdict::Neutral,
                                             Verdict::Unverifiable, Verdict::Valid, Verdict::Invalid};

struct BaselineContext {
    ChatModel& model;
    const PromptLibrary& prompts;
    int max_attempts = 3;
};

namespace detail {
inline void require_snippets(const std::vector<EvidenceSnippet>& snippets) {
    if (snippets.empty()) throw PreconditionError("baseline run needs at least one evidence snippet");
}

template <class Parse>
auto ask(BaselineContext& ctx, BaselineVerdict& out, ChatRequest req, Parse&& parse) {
    int attempts = 0;
    auto r = ask_with_retries(ctx.model, req, ctx.max_attempts, out.tokens, std::forward<Parse>(parse), &attempts);
    out.llm_calls += attempts;
    return r;
}
} // namespace detail

// ---------------------------------------------------------------------------
// COT
// ---------------------------------------------------------------------------

inline std::string render_cot_prompt(const Claim& claim, const std::vector<EvidenceSnippet>& snippets,
                                     const PromptLibrary& prompts) {
    return prompts.render(PromptId::Cot,
                          {{"claim_text", claim.text}, {"evidence_snippets", format_snippets(snippets)}});
}

inline BaselineVerdict run_cot(BaselineContext& ctx, const Claim& claim, const std::vector<EvidenceSnippet>& snippets) {
    detail::require_snippets(snippets);
    BaselineVerdict out;
    out.method = Method::COT;
    auto r = detail::ask(ctx, out, {"cot", render_cot_prompt(claim, snippets, ctx.prompts), json::object()},
                         [](const std::string& t) { return parse_verdict_reply(t, kFourWay); });
    if (!r) {
        out.verdict = Verdict::Unverifiable;
        out.warnings.push_back("cot: no parseable response");
        return out;
    }
    out.verdict = r->verdict;
    out.justification = r->justification;
    return out;
}

// ---------------------------------------------------------------------------
// SELF-RAG
// ---------------------------------------------------------------------------

enum class SupportLevel { Full, Partial, None, Contradicts };

struct Critique {
    std::string passage_id;
    bool relevant = false;
    SupportLevel support = SupportLevel::None;
    std::string note;
};

inline std::string to_string(SupportLevel s) {
    switch (s) {
    case SupportLevel::Full: return "Fully Supported";
    case SupportLevel::Partial: return "Partially Supported";
    case SupportLevel::None: return "No Support";
    case SupportLevel::Contradicts: return "Contradicts";
    }
    return {};
}

struct ParsedCritiques {
    std::vector<Critique> critiques;
    std::vector<std::string> warnings;
};

inline ParsedCritiques parse_critiques(std::string_view raw, const std::vector<EvidenceSnippet>& snippets) {
    const json body = parse_json_reply(raw);
    auto arr = body.find("critiques");
    if (arr == body.end() || !arr->is_array()) throw ParseError("response lacks a 'critiques' array");
    std::set<std::string> known;
    for (const auto& s : snippets) known.insert(s.passage_id);

    ParsedCritiques out;
    std::set<std::string> seen;
    for (const json& c : *arr) {
        if (!c.is_object() || !c.contains("passage_id") || !c["passage_id"].is_string())
            throw ParseError("critique without a string passage_id");
        Critique cr;
        cr.passage_id = c["passage_id"].get<std::string>();
        if (!known.contains(cr.passage_id)) {
            out.warnings.push_back("selfrag: critique for unknown passage '" + cr.passage_id + "' dropped");
            continue;
        }
        if (!seen.insert(cr.passage_id).second) throw ParseError("duplicate critique for " + cr.passage_id);
        const std::string rel = detail::squash(c.value("relevance", ""));
        if (rel == "relevant") cr.relevant = true;
        else if (rel == "irrelevant") cr.relevant = false;
        else throw ParseError("critique " + cr.passage_id + ": relevance must be Relevant or Irrelevant");
        const std::string sup = detail::squash(c.value("support", ""));
        if (sup == "fullysupported") cr.support = SupportLevel::Full;
        else if (sup == "partiallysupported") cr.support = SupportLevel::Partial;
        else if (sup == "nosupport") cr.support = SupportLevel::None;
        else if (sup == "contradicts") cr.support = SupportLevel::Contradicts;
        else throw ParseError("critique " + cr.passage_id + ": unknown support label");
        if (c.contains("note") && c["note"].is_string()) cr.note = c["note"].get<std::string>();
        out.critiques.push_back(std::move(cr));
    }
    return out;
}

inline std::string format_critiques(const std::vector<Critique>& critiques) {
    json arr = json::array();
    for (const auto& c : critiques)
        arr.push_back({{"passage_id", c.passage_id},
                       {"relevance", c.relevant ? "Relevant" : "Irrelevant"},
                       {"support", to_string(c.support)},
                       {"note", c.note}});
    return arr.dump(2);
}

// Synthesis rule over Relevant critiques. nullopt means the rule leaves the
// decision to the model (mixed or only partial support).
inline std::optional<Verdict> selfrag_rule(const std::vector<Critique>& critiques) {
    bool any_relevant = false, full = false, contra = false;
    for (const auto& c : critiques) {
        if (!c.relevant) continue;
        any_relevant = true;
        full = full || c.support == SupportLevel::Full;
        contra = contra || c.support == SupportLevel::Contradicts;
    }
    if (!any_relevant) return Verdict::Unverifiable;
    if (full && !contra) return Verdict::Valid;
    if (contra && !full) return Verdict::Invalid;
    return std::nullopt;
}

inline BaselineVerdict run_selfrag(BaselineContext& ctx, const Claim& claim,
                                   const std::vector<EvidenceSnippet>& snippets) {
    detail::require_snippets(snippets);
    BaselineVerdict out;
    out.method = Method::SELFRAG;
    const std::string with_ids = format_snippets_with_ids(snippets);

    json passage_ids = json::array();
    for (const auto& s : snippets) passage_ids.push_back(s.passage_id);
    ChatRequest critique_req{"selfrag_critique",
                             ctx.prompts.render(PromptId::SelfragCritique,
                                                {{"claim_text", claim.text}, {"evidence_snippets_with_ids", with_ids}}),
                             {{"passage_ids", passage_ids}}};
    auto crit = detail::ask(ctx, out, critique_req,
                            [&](const std::string& t) { return parse_critiques(t, snippets); });
    if (!crit) {
        out.warnings.push_back("selfrag: critique turn failed");
        return out;
    }
    for (auto& w : crit->warnings) out.warnings.push_back(std::move(w));

    ChatRequest synth_req{"selfrag_synthesis",
                          ctx.prompts.render(PromptId::SelfragSynthesis,
                                             {{"claim_text", claim.text},
                                              {"evidence_snippets_with_ids", with_ids},
                                              {"critique_results", format_critiques(crit->critiques)}}),
                          json::object()};
    auto synth = detail::ask(ctx, out, synth_req, [](const std::string& t) {
        return parse_verdict_reply(t, {Verdict::Valid, Verdict::Invalid, Verdict::Unverifiable});
    });

    const auto ruled = selfrag_rule(crit->critiques);
    if (synth) out.justification = synth->justification;
    if (ruled) {
        out.verdict = *ruled;
        if (synth && synth->verdict != *ruled)
            out.warnings.push_back("selfrag: model said " + to_string(synth->verdict) + ", rule gives " +
                                   to_string(*ruled));
    } else if (!synth) {
        out.verdict = Verdict::Unverifiable;
        out.warnings.push_back("selfrag: synthesis turn failed");
    } else {
        // no Fully Supported critique survives the rule, so Valid is not allowed
        out.verdict = synth->verdict == Verdict::Valid ? Verdict::Unverifiable : synth->verdict;
    }
    return out;
}

// ---------------------------------------------------------------------------
// FLARE
// ---------------------------------------------------------------------------

inline BaselineVerdict run_flare(BaselineContext& ctx, const Claim& claim, const std::vector<EvidenceSnippet>& snippets,
                                 const std::map<std::string, std::string>& full_texts) {
    detail::require_snippets(snippets);
    BaselineVerdict out;
    out.method = Method::FLARE;
    const auto papers = snippet_papers(snippets);
    std::string paper_list;
    for (const auto& p : papers) paper_list += (paper_list.empty() ? "" : ", ") + p;
    const std::string evidence = format_snippets(snippets);

    struct Assessment {
        ParsedVerdict verdict;
        std::optional<std::string> review_id;
    };
    ChatRequest assess_req{"flare_assess",
                           ctx.prompts.render(PromptId::FlareAssess,
                                              {{"claim_text", claim.text},
                                               {"suggested_standard", to_string(claim.required_standard)},
                                               {"evidence_snippets", evidence},
                                               {"paper_ids", paper_list}}),
                           {{"paper_ids", papers}}};
    auto first = detail::ask(ctx, out, assess_req, [](const std::string& t) {
        Assessment a{parse_verdict_reply(t, kFourWay), std::nullopt};
        auto it = a.verdict.raw.find("full_review_paper_id");
        if (it != a.verdict.raw.end() && it->is_string() && !it->get<std::string>().empty())
            a.review_id = it->get<std::string>();
        else if (it != a.verdict.raw.end() && !it->is_null() && !it->is_string())
            throw ParseError("full_review_paper_id must be a string or null");
        return a;
    });
    if (!first) {
        out.warnings.push_back("flare: assessment turn failed");
        return out;
    }
    out.verdict = first->verdict.verdict;
    out.justification = first->verdict.justification;
    if (!first->review_id) return out;

    const std::string& id = *first->review_id;
    if (std::find(papers.begin(), papers.end(), id) == papers.end()) {
        out.warnings.push_back("flare: requested paper '" + id + "' is not among the evidence papers");
        return out;
    }
    auto text = full_texts.find(id);
    if (text == full_texts.end()) {
        out.warnings.push_back("flare: full text of '" + id + "' is not in the corpus");
        return out;
    }

    ChatRequest final_req{"flare_final",
                          ctx.prompts.render(PromptId::FlareFinal, {{"claim_text", claim.text},
                                                                    {"evidence_snippets", evidence},
                                                                    {"paper_id", id},
                                                                    {"full_paper_text", text->second}}),
                          json::object()};
    auto second = detail::ask(ctx, out, final_req, [](const std::string& t) { return parse_verdict_reply(t, kFourWay); });
    if (!second) {
        out.verdict = Verdict::Unverifiable;
        out.warnings.push_back("flare: full-review turn failed");
        return out;
    }
    out.verdict = second->verdict;
    out.justification = second->justification;
    return out;
}

// ---------------------------------------------------------------------------
// CIBER
// ---------------------------------------------------------------------------

// Probe order is agree, conflict, paraphrase.
inline constexpr std::size_t kConflictProbe = 1;

inline Verdict flip_polarity(Verdict v) {
    switch (v) {
    case Verdict::Supports: return Verdict::Refutes;
    case Verdict::Refutes: return Verdict::Supports;
    case Verdict::Valid: return Verdict::Invalid;
    case Verdict::Invalid: return Verdict::Valid;
    default: return v;
    }
}

inline BaselineVerdict run_ciber(BaselineContext& ctx, const Claim& claim,
                                 const std::vector<EvidenceSnippet>& snippets) {
    detail::require_snippets(snippets);
    for (const auto& q : claim.probe_questions)
        if (q.empty()) throw PreconditionError("ciber: claim " + claim.id + " needs three probe questions");
    BaselineVerdict out;
    out.method = Method::CIBER;
    const std::string evidence = format_snippets(snippets);
    auto parse4 = [](const std::string& t) { return parse_verdict_reply(t, kFourWay); };

    std::vector<std::pair<Verdict, double>> votes;
    auto primary = detail::ask(ctx, out, {"cot", render_cot_prompt(claim, snippets, ctx.prompts), json::object()}, parse4);
    if (primary) {
        votes.emplace_back(primary->verdict, primary->confidence);
        out.justification = primary->justification;
    } else {
        votes.emplace_back(Verdict::Neutral, 0.0);
        out.warnings.push_back("ciber: primary call failed");
    }
    for (std::size_t i = 0; i < claim.probe_questions.size(); ++i) {
        ChatRequest req{"ciber_probe",
                        ctx.prompts.render(PromptId::CiberProbe, {{"probe_question", claim.probe_questions[i]},
                                                                  {"evidence_snippets", evidence}}),
                        json::object()};
        auto r = detail::ask(ctx, out, req, parse4);
        if (!r) {
            votes.emplace_back(Verdict::Neutral, 0.0);
            out.warnings.push_back("ciber: probe " + std::to_string(i + 1) + " failed");
            continue;
        }
        votes.emplace_back(i == kConflictProbe ? flip_polarity(r->verdict) : r->verdict, r->confidence);
    }
    out.verdict = wbu_fuse(votes);
    return out;
}

inline BaselineVerdict run_baseline(Method m, BaselineContext& ctx, const Claim& claim,
                                    const std::vector<EvidenceSnippet>& snippets,
                                    const std::map<std::string, std::string>& full_texts) {
    switch (m) {
    case Method::COT: return run_cot(ctx, claim, snippets);
    case Method::SELFRAG: return run_selfrag(ctx, claim, snippets);
    case Method::FLARE: return run_flare(ctx, claim, snippets, full_texts);
    case Method::CIBER: return run_ciber(ctx, claim, snippets);
    case Method::VERIRAG: break;
    }
    throw PreconditionError("VERIRAG is not a baseline method");
}

} // namespace verirag
