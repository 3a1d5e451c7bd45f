#pragma once
// Shared domain types: checks, claims, stances, audit vectors, applicability
// masks, analysis documents and the verdict vocabulary.

#include <array>
#include <bitset>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "verirag/error.hpp"

namespace verirag {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Checks
// ---------------------------------------------------------------------------

enum class CheckId : std::uint8_t { C1 = 0, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11 };

inline constexpr std::size_t kNumChecks = 11;

inline constexpr std::array<CheckId, kNumChecks> kAllChecks = {
    CheckId::C1, CheckId::C2, CheckId::C3, CheckId::C4,  CheckId::C5, CheckId::C6,
    CheckId::C7, CheckId::C8, CheckId::C9, CheckId::C10, CheckId::C11};

constexpr std::size_t index_of(CheckId id) noexcept { return static_cast<std::size_t>(id); }

inline std::string to_string(CheckId id) { return "C" + std::to_string(index_of(id) + 1); }

inline std::optional<CheckId> parse_check_id(std::string_view s) {
    if (s.size() < 2 || s.size() > 3 || (s[0] != 'C' && s[0] != 'c')) return std::nullopt;
    int n = 0;
    for (char ch : s.substr(1)) {
        if (ch < '0' || ch > '9') return std::nullopt;
        n = n * 10 + (ch - '0');
    }
    if (n < 1 || n > static_cast<int>(kNumChecks) || (s.size() == 3 && s[1] == '0')) return std::nullopt;
    return static_cast<CheckId>(n - 1);
}

// Display names used in prompts and reports.
inline std::string_view check_name(CheckId id) {
    static constexpr std::array<std::string_view, kNumChecks> names = {
        "Data Integrity",        "Missing Data",          "Sample Representativeness",
        "Outcome Variability",   "Estimation Validity",   "Statistical Power",
        "Outlier Influence",     "Confounding Control",   "Source Consistency",
        "Effect Homogeneity",    "Subgroup Consistency"};
    return names[index_of(id)];
}

// ---------------------------------------------------------------------------
// Claims
// ---------------------------------------------------------------------------

enum class ClaimType { Simple, Composite };
enum class RequiredStandard { SettledScience, RobustStudy, PlausibleEvidence };
enum class GroundTruth { Valid, Invalid };

inline constexpr std::array<RequiredStandard, 3> kAllStandards = {
    RequiredStandard::SettledScience, RequiredStandard::RobustStudy, RequiredStandard::PlausibleEvidence};

inline std::string to_string(RequiredStandard r) {
    switch (r) {
    case RequiredStandard::SettledScience: return "Settled Science";
    case RequiredStandard::RobustStudy: return "Robust Study";
    case RequiredStandard::PlausibleEvidence: return "Plausible Evidence";
    }
    return {};
}

// Config keys use the compact spelling.
inline std::string to_key(RequiredStandard r) {
    switch (r) {
    case RequiredStandard::SettledScience: return "SettledScience";
    case RequiredStandard::RobustStudy: return "RobustStudy";
    case RequiredStandard::PlausibleEvidence: return "PlausibleEvidence";
    }
    return {};
}

namespace detail {
inline std::string squash(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == ' ' || c == '_' || c == '-') continue;
        out.push_back(static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
    }
    return out;
}
} // namespace detail

inline std::optional<RequiredStandard> parse_required_standard(std::string_view s) {
    const std::string k = detail::squash(s);
    if (k == "settledscience") return RequiredStandard::SettledScience;
    if (k == "robuststudy") return RequiredStandard::RobustStudy;
    if (k == "plausibleevidence") return RequiredStandard::PlausibleEvidence;
    return std::nullopt;
}

struct Claim {
    std::string id;
    std::string text;
    ClaimType claim_type = ClaimType::Simple;
    std::string topic;
    int specificity = 5;
    int testability = 5;
    RequiredStandard required_standard = RequiredStandard::RobustStudy;
    std::array<std::string, 3> probe_questions;
    GroundTruth ground_truth = GroundTruth::Invalid;
};

// ---------------------------------------------------------------------------
// Stance and verdicts
// ---------------------------------------------------------------------------

enum class Stance : int { Refutes = -1, Neutral = 0, Supports = 1 };

constexpr int value_of(Stance s) noexcept { return static_cast<int>(s); }

inline std::string to_string(Stance s) {
    switch (s) {
    case Stance::Refutes: return "Refutes";
    case Stance::Neutral: return "Neutral";
    case Stance::Supports: return "Supports";
    }
    return {};
}

inline std::optional<Stance> parse_stance(std::string_view s) {
    const std::string k = detail::squash(s);
    if (k == "supports" || k == "support") return Stance::Supports;
    if (k == "refutes" || k == "refute") return Stance::Refutes;
    if (k == "neutral") return Stance::Neutral;
    return std::nullopt;
}

enum class Verdict { Supports, Refutes, Neutral, Unverifiable, Valid, Invalid };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Supports: return "Supports";
    case Verdict::Refutes: return "Refutes";
    case Verdict::Neutral: return "Neutral";
    case Verdict::Unverifiable: return "Unverifiable";
    case Verdict::Valid: return "Valid";
    case Verdict::Invalid: return "Invalid";
    }
    return {};
}

// Accepts the labels the baseline prompts ask for plus a few common synonyms.
// "Uncertain" folds into Neutral: both sit on the Invalid side of the binary map.
inline std::optional<Verdict> parse_verdict(std::string_view s) {
    const std::string k = detail::squash(s);
    if (k == "supports" || k == "support" || k == "supported") return Verdict::Supports;
    if (k == "refutes" || k == "refute" || k == "refuted" || k == "contradicts" || k == "contradict")
        return Verdict::Refutes;
    if (k == "neutral" || k == "uncertain") return Verdict::Neutral;
    if (k == "unverifiable" || k == "notenoughinfo") return Verdict::Unverifiable;
    if (k == "valid" || k == "true") return Verdict::Valid;
    if (k == "invalid" || k == "false") return Verdict::Invalid;
    return std::nullopt;
}

// Binary evaluation map: only an explicit endorsement counts as Valid.
constexpr Verdict map_verdict(Verdict v) noexcept {
    return (v == Verdict::Supports || v == Verdict::Valid) ? Verdict::Valid : Verdict::Invalid;
}

constexpr Verdict to_verdict(GroundTruth g) noexcept {
    return g == GroundTruth::Valid ? Verdict::Valid : Verdict::Invalid;
}

// ---------------------------------------------------------------------------
// Audit vectors and masks
// ---------------------------------------------------------------------------

inline constexpr double kFail = 0.0;
inline constexpr double kUncertain = 0.5;
inline constexpr double kPass = 1.0;

constexpr bool is_valid_score(double s) noexcept { return s == kFail || s == kUncertain || s == kPass; }

struct AuditVector {
    std::map<CheckId, double> scores;
    std::map<CheckId, std::string> reasoning;

    bool operator==(const AuditVector&) const = default;
};

class ApplicabilityMask {
public:
    ApplicabilityMask() = default;
    explicit ApplicabilityMask(std::bitset<kNumChecks> bits) : bits_(bits) {}

    static ApplicabilityMask all() { return ApplicabilityMask(std::bitset<kNumChecks>().set()); }

    bool applicable(CheckId id) const { return bits_.test(index_of(id)); }
    void set(CheckId id, bool on = true) { bits_.set(index_of(id), on); }

    // K_i
    std::size_t count() const noexcept { return bits_.count(); }

    std::vector<CheckId> applicable_checks() const {
        std::vector<CheckId> out;
        for (CheckId id : kAllChecks)
            if (applicable(id)) out.push_back(id);
        return out;
    }

    bool operator==(const ApplicabilityMask&) const = default;

private:
    std::bitset<kNumChecks> bits_;
};

// ---------------------------------------------------------------------------
// Analysis document
// ---------------------------------------------------------------------------

struct GlobalIntegritySignals {
    std::string funding_transparency;
    std::string conflict_of_interest;
    std::string data_availability;
};

struct CheckSignal {
    bool is_applicable = false;
    std::string objective_analysis = "N/A";
};

struct AnalysisDocument {
    GlobalIntegritySignals global_integrity_signals;
    std::map<CheckId, CheckSignal> veritable_check_signals;
};

// Bit k is set iff check k is flagged applicable.
inline ApplicabilityMask derive_mask(const AnalysisDocument& analysis) {
    ApplicabilityMask mask;
    for (CheckId id : kAllChecks) {
        auto it = analysis.veritable_check_signals.find(id);
        if (it == analysis.veritable_check_signals.end())
            throw SchemaError("analysis document is missing check entry " + to_string(id));
        mask.set(id, it->second.is_applicable);
    }
    return mask;
}

struct CheckedAudit {
    AuditVector audit;
    std::vector<CheckId> dropped; // scored by the auditor but masked out
};

// Restricts an audit to applicable checks. Out-of-domain scores are rejected;
// scores on inapplicable checks are dropped and reported, not fatal.
inline CheckedAudit validate_audit(const AuditVector& audit, const ApplicabilityMask& mask) {
    CheckedAudit out;
    for (const auto& [id, score] : audit.scores) {
        if (!is_valid_score(score))
            throw SchemaError("audit score " + std::to_string(score) + " for " + to_string(id) +
                              " is not one of {0, 0.5, 1}");
        if (!mask.applicable(id)) {
            out.dropped.push_back(id);
            continue;
        }
        out.audit.scores.emplace(id, score);
        if (auto r = audit.reasoning.find(id); r != audit.reasoning.end())
            out.audit.reasoning.emplace(id, r->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

inline int require_rating(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) throw SchemaError(where + ": field '" + key + "' must be an integer");
    const int r = v.get<int>();
    if (r < 1 || r > 10) throw SchemaError(where + ": field '" + key + "' must lie in 1..10");
    return r;
}

} // namespace detail

inline AnalysisDocument analysis_from_json(const json& j, const std::string& where = "analysis") {
    AnalysisDocument doc;
    const json& g = detail::require(j, "global_integrity_signals", where);
    const std::string gw = where + ".global_integrity_signals";
    doc.global_integrity_signals.funding_transparency = detail::require_string(g, "funding_transparency", gw);
    doc.global_integrity_signals.conflict_of_interest = detail::require_string(g, "conflict_of_interest", gw);
    doc.global_integrity_signals.data_availability = detail::require_string(g, "data_availability", gw);

    const json& v = detail::require(j, "veritable_check_signals", where);
    if (!v.is_object()) throw SchemaError(where + ".veritable_check_signals: expected an object");
    for (auto it = v.begin(); it != v.end(); ++it) {
        const auto id = parse_check_id(it.key());
        if (!id) throw SchemaError(where + ".veritable_check_signals: unknown check '" + it.key() + "'");
        const std::string cw = where + ".veritable_check_signals." + it.key();
        const json& flag = detail::require(*it, "is_applicable", cw);
        if (!flag.is_boolean()) throw SchemaError(cw + ": 'is_applicable' must be a boolean");
        CheckSignal sig;
        sig.is_applicable = flag.get<bool>();
        sig.objective_analysis = detail::require_string(*it, "objective_analysis", cw);
        if (!sig.is_applicable && sig.objective_analysis != "N/A")
            throw SchemaError(cw + ": objective_analysis must be \"N/A\" when is_applicable is false");
        doc.veritable_check_signals[*id] = std::move(sig);
    }
    for (CheckId id : kAllChecks)
        if (!doc.veritable_check_signals.contains(id))
            throw SchemaError(where + ".veritable_check_signals: missing check entry " + to_string(id));
    return doc;
}

inline json to_json(const AnalysisDocument& doc) {
    json checks = json::object();
    for (const auto& [id, sig] : doc.veritable_check_signals)
        checks[to_string(id)] = {{"is_applicable", sig.is_applicable},
                                 {"objective_analysis", sig.objective_analysis}};
    return {{"global_integrity_signals",
             {{"funding_transparency", doc.global_integrity_signals.funding_transparency},
              {"conflict_of_interest", doc.global_integrity_signals.conflict_of_interest},
              {"data_availability", doc.global_integrity_signals.data_availability}}},
            {"veritable_check_signals", std::move(checks)}};
}

// Claim records use the claim-feature field names of the feature-generation
// prompt plus an id, the claim text and its fixed ground truth.
inline Claim claim_from_json(const json& j) {
    Claim c;
    c.id = detail::require_string(j, "id", "claim");
    const std::string where = "claim " + c.id;
    c.text = detail::require_string(j, "claim_text", where);
    if (c.text.empty()) throw SchemaError(where + ": claim_text is empty");

    const std::string type = detail::squash(detail::require_string(j, "claim_type", where));
    if (type == "simple") c.claim_type = ClaimType::Simple;
    else if (type == "composite") c.claim_type = ClaimType::Composite;
    else throw SchemaError(where + ": claim_type must be 'simple' or 'composite'");

    c.topic = detail::require_string(j, "topic", where);
    c.specificity = detail::require_rating(j, "specificity_rating", where);
    c.testability = detail::require_rating(j, "testability_rating", where);

    const std::string std_label = detail::require_string(j, "evidence_confidence_criteria", where);
    const auto standard = parse_required_standard(std_label);
    if (!standard) throw SchemaError(where + ": unknown evidence standard '" + std_label + "'");
    c.required_standard = *standard;

    const json& probes = detail::require(j, "ciber_probe_questions", where);
    if (!probes.is_array() || probes.size() != 3)
        throw SchemaError(where + ": ciber_probe_questions must hold exactly 3 strings");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!probes[i].is_string()) throw SchemaError(where + ": probe questions must be strings");
        c.probe_questions[i] = probes[i].get<std::string>();
    }

    const std::string gt = detail::squash(detail::require_string(j, "ground_truth", where));
    if (gt == "valid") c.ground_truth = GroundTruth::Valid;
    else if (gt == "invalid") c.ground_truth = GroundTruth::Invalid;
    else if (gt == "uncertain")
        throw SchemaError(where + ": ground_truth 'Uncertain' claims are excluded from the test set");
    else throw SchemaError(where + ": ground_truth must be 'Valid' or 'Invalid'");
    return c;
}

inline json to_json(const Claim& c) {
    return {{"id", c.id},
            {"claim_text", c.text},
            {"claim_type", c.claim_type == ClaimType::Simple ? "simple" : "composite"},
            {"topic", c.topic},
            {"specificity_rating", c.specificity},
            {"testability_rating", c.testability},
            {"evidence_confidence_criteria", to_string(c.required_standard)},
            {"ciber_probe_questions", c.probe_questions},
            {"ground_truth", c.ground_truth == GroundTruth::Valid ? "Valid" : "Invalid"}};
}

} // namespace verirag
