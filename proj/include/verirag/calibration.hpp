#pragma once
// Calibration of the quantitative models: closed-form ridge regression for the
// boldness score, brute-force (alpha, lambda) grid search against human
// verdicts, and simulation of flawed audits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"
#include "verirag/hash.hpp"
#include "verirag/hv_score.hpp"
#include "verirag/threshold.hpp"

namespace verirag {

// ---------------------------------------------------------------------------
// Ridge regression
// ---------------------------------------------------------------------------

// Solves (Xc'Xc + gamma I) w = Xc'yc on column-centered data; the intercept is
// unpenalized and restored as mean(y) - mean(X) . w.
inline RidgeModel ridge_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double gamma) {
    if (x.rows() < 1 || x.rows() != y.size())
        throw PreconditionError("ridge_fit: need rows(X) == len(y) >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw PreconditionError("ridge_fit: gamma must be > 0");
    if (!x.allFinite() || !y.allFinite()) throw PreconditionError("ridge_fit: non-finite input");

    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    const Eigen::Index p = x.cols();
    Eigen::MatrixXd a = xc.transpose() * xc;
    a.diagonal().array() += gamma;
    const Eigen::VectorXd b = xc.transpose() * yc;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    Eigen::VectorXd w = ldlt.solve(b);
    // One refinement step tightens the normal-equation residual.
    w += ldlt.solve(b - a * w);

    RidgeModel model;
    model.weights.assign(w.data(), w.data() + p);
    model.intercept = y_mean - x_mean.dot(w);
    model.gamma = gamma;
    return model;
}

// ---------------------------------------------------------------------------
// Calibration records
// ---------------------------------------------------------------------------

enum class HumanVerdict { Support, Contradict, Uncertain };

struct CalibrationRecord {
    int specificity = 5;
    int testability = 5;
    RequiredStandard required_standard = RequiredStandard::RobustStudy;
    double boldness_target = 0.5;
    Tallies tallies;
    HumanVerdict human_verdict = HumanVerdict::Uncertain;
    int confidence = 50;
    // Evidence volume behind the tallies; absent means the base volume.
    std::optional<std::size_t> evidence_count;
};

inline std::string to_string(HumanVerdict v) {
    switch (v) {
    case HumanVerdict::Support: return "Support";
    case HumanVerdict::Contradict: return "Contradict";
    case HumanVerdict::Uncertain: return "Uncertain";
    }
    return {};
}

inline CalibrationRecord calibration_record_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    static const std::vector<std::string> known = {"id",         "specificity",   "testability",
                                                   "required_standard", "boldness_target", "tallies",
                                                   "human_verdict", "confidence", "evidence_count"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw SchemaError(where + ": unknown field '" + it.key() + "'");

    CalibrationRecord r;
    r.specificity = detail::require_rating(j, "specificity", where);
    r.testability = detail::require_rating(j, "testability", where);
    const std::string standard = detail::require_string(j, "required_standard", where);
    const auto rs = parse_required_standard(standard);
    if (!rs) throw SchemaError(where + ": unknown required_standard '" + standard + "'");
    r.required_standard = *rs;

    const json& bt = detail::require(j, "boldness_target", where);
    if (!bt.is_number()) throw SchemaError(where + ": boldness_target must be a number");
    r.boldness_target = bt.get<double>();
    if (!(r.boldness_target >= 0.0 && r.boldness_target <= 1.0))
        throw SchemaError(where + ": boldness_target must lie in [0,1]");

    const json& t = detail::require(j, "tallies", where);
    auto tally = [&](const char* key) {
        const json& v = detail::require(t, key, where + ".tallies");
        if (!v.is_number() || v.get<double>() < 0.0)
            throw SchemaError(where + ".tallies: '" + key + "' must be a nonnegative number");
        return v.get<double>();
    };
    r.tallies = {tally("H_S"), tally("H_R"), tally("H_N")};

    const std::string hv_label = detail::squash(detail::require_string(j, "human_verdict", where));
    if (hv_label == "support") r.human_verdict = HumanVerdict::Support;
    else if (hv_label == "contradict") r.human_verdict = HumanVerdict::Contradict;
    else if (hv_label == "uncertain") r.human_verdict = HumanVerdict::Uncertain;
    else throw SchemaError(where + ": human_verdict must be Support, Contradict or Uncertain");

    const json& conf = detail::require(j, "confidence", where);
    if (!conf.is_number_integer() || conf.get<int>() < 0 || conf.get<int>() > 100)
        throw SchemaError(where + ": confidence must be an integer in 0..100");
    r.confidence = conf.get<int>();

    if (auto it = j.find("evidence_count"); it != j.end()) {
        if (!it->is_number_unsigned()) throw SchemaError(where + ": evidence_count must be a nonnegative integer");
        r.evidence_count = it->get<std::size_t>();
    }
    return r;
}

inline json to_json(const CalibrationRecord& r) {
    json j = {{"specificity", r.specificity},
              {"testability", r.testability},
              {"required_standard", to_key(r.required_standard)},
              {"boldness_target", r.boldness_target},
              {"tallies", {{"H_S", r.tallies.support}, {"H_R", r.tallies.refute}, {"H_N", r.tallies.neutral}}},
              {"human_verdict", to_string(r.human_verdict)},
              {"confidence", r.confidence}};
    if (r.evidence_count) j["evidence_count"] = *r.evidence_count;
    return j;
}

// JSON-lines; blank lines are skipped.
inline std::vector<CalibrationRecord> load_calibration_records(std::istream& in, const std::string& name) {
    std::vector<CalibrationRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = name + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw SchemaError(where + ": " + e.what());
        }
        out.push_back(calibration_record_from_json(j, where));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct Grid {
    std::vector<double> alpha_values;
    std::vector<double> lambda_values;

    void validate() const {
        if (alpha_values.empty() || lambda_values.empty()) throw PreconditionError("grid_search: grid is empty");
        for (std::size_t i = 1; i < alpha_values.size(); ++i)
            if (!(alpha_values[i] > alpha_values[i - 1]))
                throw ConfigError("grid: alpha values must be strictly increasing");
        for (std::size_t i = 1; i < lambda_values.size(); ++i)
            if (!(lambda_values[i] > lambda_values[i - 1]))
                throw ConfigError("grid: lambda values must be strictly increasing");
        for (double a : alpha_values)
            if (!(a >= 0.0)) throw ConfigError("grid: alpha values must be >= 0");
        for (double l : lambda_values)
            if (!(l > 0.0)) throw ConfigError("grid: lambda values must be > 0");
    }

    // start, start+step, ... up to stop inclusive; values are start + i*step.
    static std::vector<double> range(double start, double stop, double step) {
        if (!(step > 0.0)) throw ConfigError("grid: step must be > 0");
        if (!(stop >= start)) throw ConfigError("grid: stop must be >= start");
        std::vector<double> v;
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) v.push_back(start + static_cast<double>(i) * step);
        return v;
    }

    // alpha in {0, 0.05, ..., 2.0}, lambda in {0.05, ..., 2.0}.
    static Grid defaults() {
        Grid g;
        for (int i = 0; i <= 40; ++i) g.alpha_values.push_back(i * 5 / 100.0);
        for (int i = 1; i <= 40; ++i) g.lambda_values.push_back(i * 5 / 100.0);
        return g;
    }
};

struct GridSearchResult {
    HvParams params;
    std::size_t correct = 0;
    std::size_t decidable = 0; // records with a Support/Contradict label

    double accuracy() const { return decidable ? static_cast<double>(correct) / static_cast<double>(decidable) : 0.0; }
};

inline double record_threshold(const CalibrationRecord& r, const ThresholdConfig& cfg, const RidgeModel& ridge) {
    const double prior = cfg.prior(r.required_standard);
    const FeatureVector f = encode_features(r.specificity, r.testability, r.required_standard);
    const double tau_base = base_threshold(prior, ridge_predict(ridge, f));
    return tau_auto(tau_base, r.evidence_count.value_or(cfg.n_base), cfg);
}

// Correct predictions of [hv >= tau] against binarized human verdicts for one cell.
inline std::size_t count_correct(std::span<const CalibrationRecord> records, std::span<const double> taus,
                                 const HvParams& params) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.human_verdict == HumanVerdict::Uncertain) continue;
        const bool predicted_valid = verdict(hv(r.tallies, params), taus[i]) == Verdict::Valid;
        if (predicted_valid == (r.human_verdict == HumanVerdict::Support)) ++correct;
    }
    return correct;
}

// Exhaustive search; ties go to the lexicographically smallest (alpha, lambda).
inline GridSearchResult grid_search(std::span<const CalibrationRecord> records, const Grid& grid,
                                    const ThresholdConfig& cfg, const RidgeModel& ridge,
                                    unsigned max_threads = 0) {
    grid.validate();
    if (records.empty()) throw PreconditionError("grid_search: no calibration records");
    cfg.validate();

    std::vector<double> taus;
    taus.reserve(records.size());
    std::size_t decidable = 0;
    for (const auto& r : records) {
        taus.push_back(record_threshold(r, cfg, ridge));
        if (r.human_verdict != HumanVerdict::Uncertain) ++decidable;
    }
    if (decidable == 0) throw PreconditionError("grid_search: every record is Uncertain; nothing to fit");

    const std::size_t na = grid.alpha_values.size();
    const std::size_t nl = grid.lambda_values.size();
    std::vector<std::size_t> correct(na * nl, 0);

    auto eval_rows = [&](std::size_t first, std::size_t step) {
        for (std::size_t a = first; a < na; a += step)
            for (std::size_t l = 0; l < nl; ++l)
                correct[a * nl + l] =
                    count_correct(records, taus, HvParams{grid.alpha_values[a], grid.lambda_values[l]});
    };

    unsigned workers = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, na));
    if (workers <= 1 || records.size() * na * nl < 20000) {
        eval_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(eval_rows, w, workers);
    }

    // Row-major scan with strict improvement keeps the smallest cell on ties.
    GridSearchResult best;
    best.decidable = decidable;
    bool first = true;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t l = 0; l < nl; ++l) {
            const std::size_t c = correct[a * nl + l];
            if (first || c > best.correct) {
                best.params = {grid.alpha_values[a], grid.lambda_values[l]};
                best.correct = c;
                first = false;
            }
        }
    return best;
}

// ---------------------------------------------------------------------------
// Synthetic flawed audits
// ---------------------------------------------------------------------------

// Fails a uniformly drawn set of 2-4 distinct checks from `checks` and passes the
// rest. With fewer than two candidates every candidate fails.
inline AuditVector simulate_flawed_audit(std::uint64_t seed, const std::vector<CheckId>& checks) {
    std::vector<CheckId> pool = checks;
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    AuditVector out;
    if (pool.size() < 2) {
        for (CheckId id : pool) out.scores[id] = kFail;
        return out;
    }
    SplitMix64 rng(hash_combine(seed, 0x666c61776564ULL));
    const std::size_t hi = std::min<std::size_t>(4, pool.size());
    const std::size_t n_fail = 2 + static_cast<std::size_t>(rng.below(hi - 1));
    // Partial Fisher-Yates: the first n_fail entries are the failed checks.
    for (std::size_t i = 0; i < n_fail; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < pool.size(); ++i) out.scores[pool[i]] = i < n_fail ? kFail : kPass;
    return out;
}

inline AuditVector simulate_flawed_audit(std::uint64_t seed, const ApplicabilityMask& mask) {
    return simulate_flawed_audit(seed, mask.applicable_checks());
}

// Builds a synthetic calibration set: each record aggregates a handful of
// simulated flawed audits into tallies, and the label follows a hidden
// (alpha, lambda) rule with a fraction of labels flipped or left Uncertain.
struct SyntheticSetOptions {
    std::size_t records = 20;
    HvParams hidden{0.7, 0.3};
    double flip_rate = 0.1;
    double uncertain_rate = 0.1;
};

inline std::vector<CalibrationRecord> synthesize_calibration_set(std::uint64_t seed, const ThresholdConfig& cfg,
                                                                 const RidgeModel& ridge,
                                                                 const SyntheticSetOptions& opts = {}) {
    SplitMix64 rng(hash_combine(seed, 0x63616c6962ULL));
    std::vector<CalibrationRecord> out;
    out.reserve(opts.records);
    for (std::size_t n = 0; n < opts.records; ++n) {
        CalibrationRecord r;
        r.specificity = 1 + static_cast<int>(rng.below(10));
        r.testability = 1 + static_cast<int>(rng.below(10));
        r.required_standard = kAllStandards[rng.below(3)];
        r.boldness_target = std::round(rng.uniform() * 100.0) / 100.0;

        const std::size_t docs = 1 + static_cast<std::size_t>(rng.below(5));
        for (std::size_t d = 0; d < docs; ++d) {
            ApplicabilityMask mask;
            for (CheckId id : kAllChecks) mask.set(id, rng.uniform() < 0.7);
            if (mask.count() == 0) mask.set(CheckId::C1);
            const AuditVector audit = simulate_flawed_audit(rng.next(), mask);
            const double q = intrinsic_quality(audit, mask);
            const double w = 0.5 + 0.5 * rng.uniform();
            const double eta = effective_contribution(q, w);
            switch (rng.below(3)) {
            case 0: r.tallies.refute += eta; break;
            case 1: r.tallies.neutral += eta; break;
            default: r.tallies.support += eta; break;
            }
        }
        r.evidence_count = docs;
        r.confidence = static_cast<int>(rng.below(101));

        const double tau = record_threshold(r, cfg, ridge);
        bool support = verdict(hv(r.tallies, opts.hidden), tau) == Verdict::Valid;
        if (rng.uniform() < opts.flip_rate) support = !support;
        r.human_verdict = support ? HumanVerdict::Support : HumanVerdict::Contradict;
        if (rng.uniform() < opts.uncertain_rate) r.human_verdict = HumanVerdict::Uncertain;
        out.push_back(r);
    }
    return out;
}

// Ridge design matrix and targets from calibration records.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> ridge_training_data(std::span<const CalibrationRecord> records) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(kFeatureDim));
    Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto f = encode_features(records[i].specificity, records[i].testability, records[i].required_standard);
        for (std::size_t k = 0; k < kFeatureDim; ++k)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = f[k];
        y(static_cast<Eigen::Index>(i)) = records[i].boldness_target;
    }
    return {std::move(x), std::move(y)};
}

struct CalibrationResult {
    RidgeModel ridge;
    GridSearchResult search;
};

// Fits the boldness model on every record, then tunes (alpha, lambda) with it.
inline CalibrationResult calibrate(std::span<const CalibrationRecord> records, const Grid& grid,
                                   const ThresholdConfig& cfg, double gamma) {
    if (records.empty()) throw PreconditionError("calibrate: no calibration records");
    const auto [x, y] = ridge_training_data(records);
    CalibrationResult out;
    out.ridge = ridge_fit(x, y, gamma);
    out.search = grid_search(records, grid, cfg, out.ridge);
    return out;
}

} // namespace verirag
