#pragma once
// Hard-to-Vary evidential score: intrinsic quality, effective contribution,
// stance tallies, regularized log-odds and the logistic HV score.

#include <cmath>
#include <span>
#include <string>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"

namespace verirag {

struct HvParams {
    double alpha = 0.5;  // neutral-evidence penalty, >= 0
    double lambda = 0.1; // regularizer, > 0

    void validate() const {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("HvParams: lambda must be > 0");
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("HvParams: alpha must be >= 0");
    }
};

struct DocumentContribution {
    std::string doc_id;
    Stance stance = Stance::Neutral;
    double quality = 0.0; // q_i
    double weight = 1.0;  // w_i
    double eta = 0.0;     // q_i * w_i
};

struct Tallies {
    double support = 0.0; // H_S
    double refute = 0.0;  // H_R
    double neutral = 0.0; // H_N

    bool operator==(const Tallies&) const = default;
};

// Mean pass rate over applicable checks. Scores on masked-out checks are ignored.
inline double intrinsic_quality(const AuditVector& audit, const ApplicabilityMask& mask) {
    const std::size_t k = mask.count();
    if (k == 0) throw PreconditionError("intrinsic_quality: no applicable checks");
    double sum = 0.0;
    for (const auto& [id, score] : audit.scores)
        if (mask.applicable(id)) sum += score;
    return sum / static_cast<double>(k);
}

constexpr double effective_contribution(double quality, double weight) noexcept { return quality * weight; }

inline Tallies aggregate(std::span<const DocumentContribution> contribs) {
    Tallies t;
    for (const auto& c : contribs) {
        switch (c.stance) {
        case Stance::Supports: t.support += c.eta; break;
        case Stance::Refutes: t.refute += c.eta; break;
        case Stance::Neutral: t.neutral += c.eta; break;
        }
    }
    return t;
}

// ln((H_S + lambda) / (H_R + lambda)) - alpha * ln(1 + H_N)
inline double log_odds(const Tallies& t, const HvParams& p) {
    if (!(p.lambda > 0.0)) throw PreconditionError("log_odds: lambda must be > 0");
    return std::log(t.support + p.lambda) - std::log(t.refute + p.lambda) - p.alpha * std::log1p(t.neutral);
}

inline double sigmoid(double z) noexcept {
    // Branching keeps exp() from overflowing for large |z|.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double hv(const Tallies& t, const HvParams& p) { return sigmoid(log_odds(t, p)); }

} // namespace verirag
