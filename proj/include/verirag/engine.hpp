#pragma once
// One verification cell: a claim, a method and a temporal scenario. VERIRAG
// runs audit -> quality x novelty -> tallies -> HV -> dynamic threshold;
// baselines get the same scenario-filtered evidence as snippets.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "verirag/audit_pipeline.hpp"
#include "verirag/baselines.hpp"
#include "verirag/config.hpp"
#include "verirag/corpus_store.hpp"
#include "verirag/hv_score.hpp"
#include "verirag/io.hpp"
#include "verirag/redundancy.hpp"
#include "verirag/threshold.hpp"

namespace verirag {

struct DocumentTrace {
    std::string doc_id;
    Stance stance = Stance::Neutral;
    std::size_t applicable = 0; // K_i
    double quality = 0.0;
    double rho = 0.0;
    double weight = 1.0;
    double eta = 0.0;
    std::vector<std::string> chunk_ids;
};

struct VerirageTrace {
    std::vector<DocumentTrace> documents;
    Tallies tallies;
    std::optional<double> log_odds;
    std::optional<double> hv;
    std::optional<std::pair<std::size_t, std::size_t>> majority; // (supports, refutes) when HV is ablated
    std::optional<ThresholdBreakdown> threshold;                 // absent under the fixed-threshold ablation
    double tau = 0.5;
};

struct VerdictRecord {
    std::string claim_id;
    Method method = Method::VERIRAG;
    ScenarioLabel scenario = ScenarioLabel::TY0;
    GroundTruth ground_truth = GroundTruth::Valid;
    Verdict verdict = Verdict::Unverifiable; // method's raw verdict
    Verdict binary = Verdict::Invalid;       // after the evaluation map
    EvidenceSource evidence_source = EvidenceSource::EvidenceMap;
    std::vector<std::string> evidence_chunk_ids;
    std::size_t evidence_documents = 0; // N_ev
    TokenUsage tokens;
    int llm_calls = 0;
    std::string justification;
    std::vector<std::string> warnings;
    std::optional<VerirageTrace> trace;

    bool correct() const { return binary == to_verdict(ground_truth); }
};

inline std::string to_string(GroundTruth g) { return g == GroundTruth::Valid ? "Valid" : "Invalid"; }

inline json to_json(const ThresholdBreakdown& b) {
    return {{"prior", round_sig(b.prior)},
            {"boldness", round_sig(b.boldness)},
            {"tau_base", round_sig(b.tau_base)},
            {"tau", round_sig(b.tau)}};
}

inline json to_json(const VerirageTrace& t) {
    json docs = json::array();
    for (const auto& d : t.documents)
        docs.push_back({{"doc_id", d.doc_id},
                        {"stance", to_string(d.stance)},
                        {"applicable_checks", d.applicable},
                        {"quality", round_sig(d.quality)},
                        {"rho", round_sig(d.rho)},
                        {"weight", round_sig(d.weight)},
                        {"eta", round_sig(d.eta)},
                        {"chunk_ids", d.chunk_ids}});
    json j = {{"documents", std::move(docs)},
              {"tallies",
               {{"H_S", round_sig(t.tallies.support)},
                {"H_R", round_sig(t.tallies.refute)},
                {"H_N", round_sig(t.tallies.neutral)}}},
              {"log_odds", t.log_odds ? json(round_sig(*t.log_odds)) : json(nullptr)},
              {"hv", t.hv ? json(round_sig(*t.hv)) : json(nullptr)},
              {"majority", t.majority ? json{{"supports", t.majority->first}, {"refutes", t.majority->second}}
                                      : json(nullptr)},
              {"threshold", t.threshold ? to_json(*t.threshold) : json(nullptr)},
              {"tau", round_sig(t.tau)}};
    return j;
}

inline json to_json(const VerdictRecord& r) {
    json j = {{"claim_id", r.claim_id},
              {"method", to_string(r.method)},
              {"scenario", to_string(r.scenario)},
              {"ground_truth", to_string(r.ground_truth)},
              {"verdict", to_string(r.verdict)},
              {"binary_verdict", to_string(r.binary)},
              {"correct", r.correct()},
              {"evidence_source", to_string(r.evidence_source)},
              {"evidence_chunk_ids", r.evidence_chunk_ids},
              {"evidence_documents", r.evidence_documents},
              {"tokens", {{"in", r.tokens.in}, {"out", r.tokens.out}, {"approximate", r.tokens.approximate}}},
              {"llm_calls", r.llm_calls},
              {"justification", r.justification},
              {"warnings", r.warnings}};
    if (r.trace) j["verirag"] = to_json(*r.trace);
    return j;
}

// Enough of a record to recompute metrics; traces are not read back.
inline VerdictRecord record_from_json(const json& j) {
    VerdictRecord r;
    try {
        r.claim_id = j.at("claim_id").get<std::string>();
        auto m = parse_method(j.at("method").get<std::string>());
        auto s = parse_scenario(j.at("scenario").get<std::string>());
        auto v = parse_verdict(j.at("verdict").get<std::string>());
        auto b = parse_verdict(j.at("binary_verdict").get<std::string>());
        const std::string gt = j.at("ground_truth").get<std::string>();
        if (!m || !s || !v || !b || (gt != "Valid" && gt != "Invalid")) throw SchemaError("bad label");
        r.method = *m;
        r.scenario = *s;
        r.verdict = *v;
        r.binary = *b;
        r.ground_truth = gt == "Valid" ? GroundTruth::Valid : GroundTruth::Invalid;
        r.evidence_source = j.value("evidence_source", "evidence_map") == "retrieval" ? EvidenceSource::Retrieval
                                                                                       : EvidenceSource::EvidenceMap;
        r.evidence_chunk_ids = j.value("evidence_chunk_ids", std::vector<std::string>{});
        r.evidence_documents = j.value("evidence_documents", std::size_t{0});
        const json& t = j.at("tokens");
        r.tokens = {t.at("in").get<std::size_t>(), t.at("out").get<std::size_t>(), t.value("approximate", false)};
        r.llm_calls = j.value("llm_calls", 0);
        r.justification = j.value("justification", "");
        r.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const json::exception& e) {
        throw SchemaError(std::string("verdict record: ") + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(std::string("verdict record for '") + r.claim_id + "': " + e.what());
    }
    return r;
}

// ---------------------------------------------------------------------------
// Cell execution
// ---------------------------------------------------------------------------

// Shared, read-only state for a matrix run.
struct EngineContext {
    const Corpus& corpus;
    const ModelParams& params;
    const ThresholdConfig& threshold;
    AblationFlags flags;
    TokenizerOptions tokenizer;
    Auditor& auditor;
    ChatModel& chat;
    const PromptLibrary& prompts;
    int max_attempts = 3;
};

// Evidence documents in first-appearance order with their chunks.
inline std::vector<std::pair<std::string, std::vector<const EvidenceChunk*>>>
group_by_document(const std::vector<const EvidenceChunk*>& chunks) {
    std::vector<std::pair<std::string, std::vector<const EvidenceChunk*>>> out;
    std::map<std::string, std::size_t> pos;
    for (const auto* c : chunks) {
        auto [it, fresh] = pos.emplace(c->doc_id, out.size());
        if (fresh) out.push_back({c->doc_id, {}});
        out[it->second].second.push_back(c);
    }
    return out;
}

inline void run_verirag(const EngineContext& ctx, const Claim& claim, const std::vector<const EvidenceChunk*>& chunks,
                        VerdictRecord& rec) {
    VerirageTrace trace;
    const auto grouped = group_by_document(chunks);

    std::map<std::string, AuditResult> audits;
    if (!grouped.empty()) {
        AuditRequest req{claim.text, {}};
        for (const auto& [doc_id, doc_chunks] : grouped) {
            const Document& d = ctx.corpus.document(doc_id);
            if (!d.analysis) throw PreconditionError("document '" + doc_id + "' has no analysis and cannot be audited");
            PaperToAudit p{doc_id, *d.analysis, {}};
            for (const auto* c : doc_chunks) p.evidence_text_chunks.push_back(c->text);
            req.papers.push_back(std::move(p));
        }
        AuditOutcome outcome = ctx.auditor.audit(req);
        rec.tokens += outcome.tokens;
        rec.llm_calls += outcome.attempts;
        for (auto& w : outcome.warnings) rec.warnings.push_back(std::move(w));
        for (auto& r : outcome.results) audits.emplace(r.paper_id, std::move(r));
    }

    std::map<std::string, DocumentRedundancy> redundancy;
    if (ctx.flags.use_redundancy_penalty) {
        std::vector<EvidenceText> texts;
        for (const auto* c : chunks) texts.push_back({c->doc_id, c->text});
        redundancy = evidence_weights(texts, ctx.tokenizer);
    }

    std::vector<DocumentContribution> contribs;
    std::size_t n_sup = 0, n_ref = 0;
    for (const auto& [doc_id, doc_chunks] : grouped) {
        const AuditResult& a = audits.at(doc_id);
        const ApplicabilityMask mask = derive_mask(*ctx.corpus.document(doc_id).analysis);
        DocumentTrace dt;
        dt.doc_id = doc_id;
        dt.stance = a.stance;
        dt.applicable = mask.count();
        if (dt.applicable == 0) {
            rec.warnings.push_back("document '" + doc_id + "' has no applicable checks; quality set to 0");
            dt.quality = 0.0;
        } else {
            dt.quality = intrinsic_quality(a.audit, mask);
        }
        if (ctx.flags.use_redundancy_penalty) {
            const auto& r = redundancy.at(doc_id);
            dt.rho = r.rho;
            dt.weight = r.weight;
        }
        dt.eta = effective_contribution(dt.quality, dt.weight);
        for (const auto* c : doc_chunks) dt.chunk_ids.push_back(c->id);
        contribs.push_back({doc_id, dt.stance, dt.quality, dt.weight, dt.eta});
        n_sup += dt.stance == Stance::Supports;
        n_ref += dt.stance == Stance::Refutes;
        trace.documents.push_back(std::move(dt));
    }
    trace.tallies = aggregate(contribs);

    if (ctx.flags.use_dynamic_threshold) {
        trace.threshold = claim_threshold(claim, ctx.params.ridge, rec.evidence_documents, ctx.threshold);
        trace.tau = trace.threshold->tau;
    } else {
        trace.tau = 0.5;
    }

    if (ctx.flags.use_hv_score) {
        trace.log_odds = log_odds(trace.tallies, ctx.params.hv);
        trace.hv = sigmoid(*trace.log_odds);
        rec.verdict = verdict(*trace.hv, trace.tau);
    } else {
        trace.majority = std::make_pair(n_sup, n_ref);
        rec.verdict = n_sup > n_ref ? Verdict::Valid : Verdict::Invalid;
    }
    rec.trace = std::move(trace);
}

inline void run_baseline_cell(const EngineContext& ctx, const Claim& claim,
                              const std::vector<const EvidenceChunk*>& chunks, VerdictRecord& rec) {
    if (chunks.empty()) {
        rec.verdict = Verdict::Unverifiable;
        rec.warnings.push_back("no evidence in scenario; baseline not called");
        return;
    }
    std::vector<EvidenceSnippet> snippets;
    std::map<std::string, std::string> full_texts;
    for (const auto* c : chunks) {
        snippets.push_back({c->id, c->doc_id, c->text});
        if (!full_texts.contains(c->doc_id)) full_texts.emplace(c->doc_id, ctx.corpus.document(c->doc_id).text());
    }
    BaselineContext bctx{ctx.chat, ctx.prompts, ctx.max_attempts};
    BaselineVerdict v = run_baseline(rec.method, bctx, claim, snippets, full_texts);
    rec.verdict = v.verdict;
    rec.justification = std::move(v.justification);
    rec.tokens += v.tokens;
    rec.llm_calls += v.llm_calls;
    for (auto& w : v.warnings) rec.warnings.push_back(std::move(w));
}

// `evidence` is the claim's unfiltered evidence list.
inline VerdictRecord run_cell(const EngineContext& ctx, const Claim& claim, const ClaimEvidence& evidence,
                              Method method, ScenarioLabel scenario) {
    VerdictRecord rec;
    rec.claim_id = claim.id;
    rec.method = method;
    rec.scenario = scenario;
    rec.ground_truth = claim.ground_truth;
    rec.evidence_source = evidence.source;
    const auto chunks = filter_scenario(evidence.chunks, ctx.corpus.scenario(scenario));
    for (const auto* c : chunks) rec.evidence_chunk_ids.push_back(c->id);
    rec.evidence_documents = distinct_documents(chunks);
    if (method == Method::VERIRAG)
        run_verirag(ctx, claim, chunks, rec);
    else
        run_baseline_cell(ctx, claim, chunks, rec);
    rec.binary = map_verdict(rec.verdict);
    return rec;
}

} // namespace verirag
