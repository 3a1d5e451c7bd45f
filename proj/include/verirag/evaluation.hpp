#pragma once
// Metrics (macro-F1, MCC, Cohen's kappa, Gwet's AC1), the verification
// matrix runner and report rendering.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "verirag/engine.hpp"
#include "verirag/error.hpp"
#include "verirag/io.hpp"

namespace verirag {

// Positive class = Valid.
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }

    void add(Verdict predicted, Verdict actual) {
        const bool p = predicted == Verdict::Valid, a = actual == Verdict::Valid;
        if (p && a) ++tp;
        else if (p) ++fp;
        else if (a) ++fn;
        else ++tn;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

namespace detail {
inline double f1(std::size_t hit, std::size_t false_pos, std::size_t false_neg) {
    const std::size_t d = 2 * hit + false_pos + false_neg;
    return d == 0 ? 0.0 : 2.0 * static_cast<double>(hit) / static_cast<double>(d);
}
} // namespace detail

inline double macro_f1(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw PreconditionError("macro_f1: empty confusion matrix");
    return 0.5 * (detail::f1(cm.tp, cm.fp, cm.fn) + detail::f1(cm.tn, cm.fn, cm.fp));
}

inline double mcc(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw PreconditionError("mcc: empty confusion matrix");
    const auto d = [](std::size_t x) { return static_cast<double>(x); };
    const double den = d(cm.tp + cm.fp) * d(cm.tp + cm.fn) * d(cm.tn + cm.fp) * d(cm.tn + cm.fn);
    if (den == 0.0) return 0.0;
    return (d(cm.tp) * d(cm.tn) - d(cm.fp) * d(cm.fn)) / std::sqrt(den);
}

namespace detail {
template <class L>
void check_raters(const std::vector<L>& a, const std::vector<L>& b) {
    if (a.size() != b.size()) throw PreconditionError("agreement: label lists differ in length");
    if (a.empty()) throw PreconditionError("agreement: empty label lists");
}

template <class L>
double observed_agreement(const std::vector<L>& a, const std::vector<L>& b) {
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return static_cast<double>(same) / static_cast<double>(a.size());
}
} // namespace detail

template <class L>
double cohen_kappa(const std::vector<L>& a, const std::vector<L>& b) {
    detail::check_raters(a, b);
    const double n = static_cast<double>(a.size());
    std::map<L, double> ca, cb;
    for (const auto& x : a) ca[x] += 1.0;
    for (const auto& x : b) cb[x] += 1.0;
    double pe = 0.0;
    for (const auto& [k, v] : ca)
        if (auto it = cb.find(k); it != cb.end()) pe += (v / n) * (it->second / n);
    const double po = detail::observed_agreement(a, b);
    if (pe >= 1.0) return po == 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

// Categories are those used by either rater unless given explicitly.
template <class L>
double gwet_ac1(const std::vector<L>& a, const std::vector<L>& b, std::set<L> categories = {}) {
    detail::check_raters(a, b);
    for (const auto& x : a) categories.insert(x);
    for (const auto& x : b) categories.insert(x);
    const double po = detail::observed_agreement(a, b);
    const std::size_t k = categories.size();
    if (k < 2) return po == 1.0 ? 1.0 : 0.0;
    const double n = static_cast<double>(a.size());
    double pe = 0.0;
    for (const auto& c : categories) {
        const double na = static_cast<double>(std::count(a.begin(), a.end(), c));
        const double nb = static_cast<double>(std::count(b.begin(), b.end(), c));
        const double pi = (na / n + nb / n) / 2.0;
        pe += pi * (1.0 - pi);
    }
    pe /= static_cast<double>(k - 1);
    return (po - pe) / (1.0 - pe);
}

// ---------------------------------------------------------------------------
// Matrix runner
// ---------------------------------------------------------------------------

struct CellFailure {
    std::string claim_id;
    Method method = Method::VERIRAG;
    ScenarioLabel scenario = ScenarioLabel::TY0;
    std::string error;
};

struct CellMetrics {
    Method method = Method::VERIRAG;
    ScenarioLabel scenario = ScenarioLabel::TY0;
    ConfusionMatrix cm;
    std::optional<double> macro_f1;
    std::optional<double> mcc;
    double avg_tokens_in = 0.0;
    double avg_tokens_out = 0.0;
    bool tokens_approximate = false;

    double avg_tokens() const { return avg_tokens_in + avg_tokens_out; }
};

struct RunReport {
    std::vector<VerdictRecord> records;
    std::vector<CellFailure> failures;
    std::vector<CellMetrics> metrics;
};

// Metrics per (method, scenario) in the given orders; cells without records
// are kept with empty scores.
inline std::vector<CellMetrics> compute_metrics(const std::vector<VerdictRecord>& records,
                                                const std::vector<Method>& methods,
                                                const std::vector<ScenarioLabel>& scenarios) {
    std::vector<CellMetrics> out;
    for (Method m : methods)
        for (ScenarioLabel s : scenarios) {
            CellMetrics c{m, s, {}, std::nullopt, std::nullopt, 0.0, 0.0, false};
            std::size_t tin = 0, tout = 0;
            for (const auto& r : records) {
                if (r.method != m || r.scenario != s) continue;
                c.cm.add(r.binary, to_verdict(r.ground_truth));
                tin += r.tokens.in;
                tout += r.tokens.out;
                c.tokens_approximate = c.tokens_approximate || r.tokens.approximate;
            }
            if (const std::size_t n = c.cm.total(); n > 0) {
                c.macro_f1 = macro_f1(c.cm);
                c.mcc = mcc(c.cm);
                c.avg_tokens_in = static_cast<double>(tin) / static_cast<double>(n);
                c.avg_tokens_out = static_cast<double>(tout) / static_cast<double>(n);
            }
            out.push_back(c);
        }
    return out;
}

struct MatrixSpec {
    std::vector<std::string> claim_ids; // empty = all claims
    std::vector<Method> methods;
    std::vector<ScenarioLabel> scenarios;
    unsigned threads = 0;
};

// Every (claim, scenario, method) cell in that nesting order. Cells run in
// parallel; records are assembled in cell order so output is independent of
// scheduling. A failing cell is recorded, never fatal.
inline RunReport run_matrix(const EngineContext& ctx, const MatrixSpec& spec, Embedder* embedder, int k) {
    std::vector<const Claim*> claims;
    if (spec.claim_ids.empty()) {
        for (const auto& c : ctx.corpus.claims) claims.push_back(&c);
    } else {
        for (const auto& id : spec.claim_ids) claims.push_back(&ctx.corpus.claim(id));
    }
    for (ScenarioLabel s : spec.scenarios) (void)ctx.corpus.scenario(s);

    struct Cell {
        std::size_t claim;
        ScenarioLabel scenario;
        Method method;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < claims.size(); ++i)
        for (ScenarioLabel s : spec.scenarios)
            for (Method m : spec.methods) cells.push_back({i, s, m});

    // Evidence lists are resolved up front, once per claim.
    std::vector<std::optional<ClaimEvidence>> evidence(claims.size());
    std::vector<std::string> evidence_errors(claims.size());
    for (std::size_t i = 0; i < claims.size(); ++i) {
        try {
            evidence[i] = claim_evidence(ctx.corpus, *claims[i], embedder, k);
        } catch (const std::exception& e) {
            evidence_errors[i] = e.what();
        }
    }

    std::vector<std::optional<VerdictRecord>> results(cells.size());
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            if (!evidence[c.claim]) {
                errors[i] = "evidence resolution failed: " + evidence_errors[c.claim];
                continue;
            }
            try {
                results[i] = run_cell(ctx, *claims[c.claim], *evidence[c.claim], c.method, c.scenario);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    unsigned n = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(1, cells.size())));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }

    RunReport report;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (results[i])
            report.records.push_back(std::move(*results[i]));
        else
            report.failures.push_back({claims[cells[i].claim]->id, cells[i].method, cells[i].scenario, errors[i]});
    }
    report.metrics = compute_metrics(report.records, spec.methods, spec.scenarios);
    return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json to_json(const CellMetrics& c) {
    auto opt = [](const std::optional<double>& v) { return v ? json(round_sig(*v)) : json(nullptr); };
    return {{"method", to_string(c.method)},
            {"scenario", to_string(c.scenario)},
            {"n", c.cm.total()},
            {"tp", c.cm.tp},
            {"fp", c.cm.fp},
            {"fn", c.cm.fn},
            {"tn", c.cm.tn},
            {"macro_f1", opt(c.macro_f1)},
            {"mcc", opt(c.mcc)},
            {"avg_tokens_in", round_sig(c.avg_tokens_in)},
            {"avg_tokens_out", round_sig(c.avg_tokens_out)},
            {"avg_tokens", round_sig(c.avg_tokens())},
            {"tokens_approximate", c.tokens_approximate}};
}

inline json to_json(const CellFailure& f) {
    return {{"claim_id", f.claim_id},
            {"method", to_string(f.method)},
            {"scenario", to_string(f.scenario)},
            {"error", f.error}};
}

inline json metrics_json(const std::vector<CellMetrics>& metrics) {
    json arr = json::array();
    for (const auto& m : metrics) arr.push_back(to_json(m));
    return arr;
}

inline json to_json(const RunReport& r) {
    json records = json::array(), failures = json::array();
    for (const auto& x : r.records) records.push_back(to_json(x));
    for (const auto& f : r.failures) failures.push_back(to_json(f));
    return {{"records", std::move(records)}, {"failures", std::move(failures)}, {"metrics", metrics_json(r.metrics)}};
}

// Plain-text grid: one block per metric, methods as rows, scenarios as columns.
inline std::string render_table(const std::vector<CellMetrics>& metrics, const std::vector<Method>& methods,
                                const std::vector<ScenarioLabel>& scenarios) {
    auto find = [&](Method m, ScenarioLabel s) -> const CellMetrics* {
        for (const auto& c : metrics)
            if (c.method == m && c.scenario == s) return &c;
        return nullptr;
    };
    std::string out;
    char buf[64];
    auto block = [&](const char* title, auto value) {
        std::snprintf(buf, sizeof buf, "%-10s", title);
        out += buf;
        for (ScenarioLabel s : scenarios) {
            std::snprintf(buf, sizeof buf, " %10s", to_string(s).c_str());
            out += buf;
        }
        out += "\n";
        for (Method m : methods) {
            std::snprintf(buf, sizeof buf, "%-10s", to_string(m).c_str());
            out += buf;
            for (ScenarioLabel s : scenarios) {
                const CellMetrics* c = find(m, s);
                out += value(c);
            }
            out += "\n";
        }
        out += "\n";
    };
    auto score = [&](std::optional<double> CellMetrics::*field) {
        return [&buf, field](const CellMetrics* c) -> std::string {
            if (!c || !(c->*field)) return std::string(10, ' ') + "-";
            std::snprintf(buf, sizeof buf, " %10.4f", *(c->*field));
            return buf;
        };
    };
    block("Macro-F1", score(&CellMetrics::macro_f1));
    block("MCC", score(&CellMetrics::mcc));
    bool approx = false;
    for (const auto& c : metrics) approx = approx || c.tokens_approximate;
    block(approx ? "Tokens*" : "Tokens", [&](const CellMetrics* c) -> std::string {
        if (!c || c->cm.total() == 0) return std::string(10, ' ') + "-";
        std::snprintf(buf, sizeof buf, " %10.1f", c->avg_tokens());
        return buf;
    });
    if (approx) out += "* average tokens per claim; approximate counts (ceil(bytes/4)) included\n";
    else out += "average tokens per claim\n";
    return out;
}

inline std::string render_csv(const std::vector<CellMetrics>& metrics) {
    std::string out = "method,scenario,n,tp,fp,fn,tn,macro_f1,mcc,avg_tokens_in,avg_tokens_out,tokens_approximate\n";
    char buf[256];
    for (const auto& c : metrics) {
        auto fmt = [](std::optional<double> v) {
            if (!v) return std::string();
            char b[32];
            std::snprintf(b, sizeof b, "%.6f", *v);
            return std::string(b);
        };
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%zu,%zu,%zu,%s,%s,%.2f,%.2f,%s\n", to_string(c.method).c_str(),
                      to_string(c.scenario).c_str(), c.cm.total(), c.cm.tp, c.cm.fp, c.cm.fn, c.cm.tn,
                      fmt(c.macro_f1).c_str(), fmt(c.mcc).c_str(), c.avg_tokens_in, c.avg_tokens_out,
                      c.tokens_approximate ? "true" : "false");
        out += buf;
    }
    return out;
}

} // namespace verirag
