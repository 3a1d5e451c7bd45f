#pragma once
// Dynamic acceptance threshold: prior/boldness blend, evidence-volume
// adjustment and clamping.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"

namespace verirag {

struct ThresholdConfig {
    std::map<RequiredStandard, double> priors = {{RequiredStandard::PlausibleEvidence, 0.60},
                                                 {RequiredStandard::RobustStudy, 0.75},
                                                 {RequiredStandard::SettledScience, 0.90}};
    double scaling = 0.05;  // C
    std::size_t n_base = 2; // evidence count of the initial scenario
    double clamp_lo = 0.5;
    double clamp_hi = 0.95;

    double prior(RequiredStandard r) const {
        auto it = priors.find(r);
        if (it == priors.end()) throw ConfigError("threshold: no prior for '" + to_key(r) + "'");
        return it->second;
    }

    void validate() const {
        for (RequiredStandard r : kAllStandards) {
            const double p = prior(r);
            if (!(p > 0.0 && p < 1.0)) throw ConfigError("threshold: prior for '" + to_key(r) + "' must lie in (0,1)");
        }
        if (!(scaling >= 0.0)) throw ConfigError("threshold: C must be >= 0");
        if (n_base == 0) throw ConfigError("threshold: N_base must be positive");
        if (!(clamp_lo < clamp_hi)) throw ConfigError("threshold: clamp bounds must satisfy lo < hi");
    }
};

inline constexpr std::size_t kFeatureDim = 5;
using FeatureVector = std::array<double, kFeatureDim>;

// [S/10, T/10, one-hot(R)] with one-hot order SettledScience, RobustStudy, PlausibleEvidence.
inline FeatureVector encode_features(int specificity, int testability, RequiredStandard standard) {
    FeatureVector f{};
    f[0] = static_cast<double>(specificity) / 10.0;
    f[1] = static_cast<double>(testability) / 10.0;
    switch (standard) {
    case RequiredStandard::SettledScience: f[2] = 1.0; break;
    case RequiredStandard::RobustStudy: f[3] = 1.0; break;
    case RequiredStandard::PlausibleEvidence: f[4] = 1.0; break;
    }
    return f;
}

inline FeatureVector encode_features(const Claim& c) {
    return encode_features(c.specificity, c.testability, c.required_standard);
}

struct RidgeModel {
    std::vector<double> weights = std::vector<double>(kFeatureDim, 0.0);
    double intercept = 0.5;
    double gamma = 1.0;
};

// Boldness score f(S, T, R): linear prediction clipped to [0, 1].
inline double ridge_predict(const RidgeModel& model, std::span<const double> features) {
    if (features.size() != model.weights.size())
        throw PreconditionError("ridge_predict: feature dimension " + std::to_string(features.size()) +
                                " does not match model dimension " + std::to_string(model.weights.size()));
    double y = model.intercept;
    for (std::size_t i = 0; i < features.size(); ++i) y += model.weights[i] * features[i];
    return std::clamp(y, 0.0, 1.0);
}

constexpr double base_threshold(double prior, double boldness) noexcept { return 0.5 * prior + 0.5 * boldness; }

inline double tau_auto(double tau_base, std::size_t evidence_count, const ThresholdConfig& cfg) {
    if (cfg.n_base == 0) throw ConfigError("threshold: N_base must be positive");
    const double ratio = static_cast<double>(evidence_count) / static_cast<double>(cfg.n_base);
    const double tau = tau_base + cfg.scaling * std::max(0.0, ratio - 1.0);
    return std::clamp(tau, cfg.clamp_lo, cfg.clamp_hi);
}

// Ties accept. Calibration uses the same comparison.
constexpr Verdict verdict(double hv_score, double tau) noexcept {
    return hv_score >= tau ? Verdict::Valid : Verdict::Invalid;
}

struct ThresholdBreakdown {
    double prior = 0.0;
    double boldness = 0.0;
    double tau_base = 0.0;
    double tau = 0.0;
};

inline ThresholdBreakdown claim_threshold(const Claim& claim, const RidgeModel& ridge, std::size_t evidence_count,
                                          const ThresholdConfig& cfg) {
    ThresholdBreakdown b;
    b.prior = cfg.prior(claim.required_standard);
    const FeatureVector f = encode_features(claim);
    b.boldness = ridge_predict(ridge, f);
    b.tau_base = base_threshold(b.prior, b.boldness);
    b.tau = tau_auto(b.tau_base, evidence_count, cfg);
    return b;
}

} // namespace verirag
