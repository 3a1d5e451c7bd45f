// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support/engine_fixture.hpp"
#include "support/fixtures.hpp"
#include "support/properties.hpp"
#include "verirag/verirag.hpp"

using namespace verirag;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        } else if (!cond) {
            detail += "; " + why;
        }
    }
    void note(const std::string& s) {
        if (ok) detail += (detail.empty() ? "" : ", ") + s;
    }
    void absorb(const vtest::Sweep& s, const std::string& name) {
        require(s.ok(), name + ": " + std::to_string(s.failures) + "/" + std::to_string(s.cases) + " failed (" +
                            s.first_failure + ")");
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << v;
    return ss.str();
}

Outcome check_propositions() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto bm = vtest::sweep_boundedness_monotonicity(10000, 101);
    const auto ri = vtest::sweep_redundancy_immunity(10000, 102);
    const double secs = seconds_since(t0);
    o.absorb(bm, "boundedness/monotonicity");
    o.absorb(ri, "redundancy immunity");
    o.require(ri.worst < 1e-6, "redundancy drift " + fmt(ri.worst));
    o.require(secs < 30.0, "took " + fmt(secs) + " s");
    o.note(std::to_string(bm.cases + ri.cases) + " configs, drift " + fmt(ri.worst) + ", " + fmt(secs) + " s");
    return o;
}

Outcome check_formula_oracles() {
    Outcome o;
    const auto s = vtest::sweep_formula_oracle(1000, 103);
    o.absorb(s, "hp oracle");
    o.require(s.worst <= 1e-9, "relative error " + fmt(s.worst));
    const Tallies t{2.0, 0.5, 1.0};
    const HvParams p{0.5, 0.1};
    o.require(std::abs(log_odds(t, p) - 0.906189) <= 1e-6, "log_odds " + fmt(log_odds(t, p), 10));
    o.require(std::abs(hv(t, p) - 0.7122) <= 1e-4, "hv " + fmt(hv(t, p), 10));
    o.note("worst rel err " + fmt(s.worst));
    return o;
}

Outcome check_ridge() {
    Outcome o;
    const auto res = vtest::sweep_ridge_residual(200, 104);
    const auto lim = vtest::sweep_ridge_limit(200, 105);
    o.absorb(res, "normal-equation residual");
    o.absorb(lim, "gamma->0 limit");
    o.note("residual " + fmt(res.worst) + ", limit gap " + fmt(lim.worst));
    return o;
}

Outcome check_grid_search() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = vtest::sweep_grid_search(50, 40, 106);
    const double secs = seconds_since(t0);
    o.absorb(s, "grid argmax");
    o.require(secs < 60.0, "took " + fmt(secs) + " s");
    o.note(std::to_string(s.cases) + " sets, " + fmt(secs) + " s");
    return o;
}

Outcome check_metric_oracles() {
    Outcome o;
    const auto s = vtest::sweep_metrics_exhaustive(12);
    o.absorb(s, "macro_f1/mcc");
    const std::vector<char> a = {'A', 'A', 'B', 'B'}, b = {'A', 'A', 'B', 'A'};
    o.require(std::abs(cohen_kappa(a, b) - 0.5) <= 1e-12, "kappa " + fmt(cohen_kappa(a, b), 10));
    o.require(std::abs(gwet_ac1(a, b) - 0.52941) <= 1e-5, "ac1 " + fmt(gwet_ac1(a, b), 10));
    o.note(std::to_string(s.cases) + " confusion matrices");
    return o;
}

Outcome check_redundancy() {
    Outcome o;
    const std::vector<std::string> texts = {"a b", "a c"};
    const auto model = tfidf_fit(texts);
    const double c = cosine(model.transform(texts[0]), model.transform(texts[1]));
    o.require(std::abs(c - 0.3361) <= 1e-4, "cosine " + fmt(c, 10));
    vtest::Gen g(107);
    double worst = 1.0;
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> chunks;
        const int n = g.integer(1, 6);
        for (int i = 0; i < n; ++i) chunks.push_back(g.sentence());
        chunks.push_back(chunks[g.integer(0, n - 1)]);
        const auto m = tfidf_fit(chunks);
        std::vector<SparseVector> v;
        for (const auto& t : chunks) v.push_back(m.transform(t));
        worst = std::min(worst, chunk_redundancy(v).back());
    }
    o.require(worst >= 1.0 - 1e-9, "duplicate rho " + fmt(worst, 12));
    o.note("cosine " + fmt(c, 5) + ", min duplicate rho " + fmt(worst, 12));
    return o;
}

Outcome check_threshold() {
    Outcome o;
    o.require(std::abs(base_threshold(0.8, 0.6) - 0.7) <= 1e-12, "blend");
    ThresholdConfig cfg;
    cfg.scaling = 0.05;
    cfg.n_base = 10;
    o.require(std::abs(tau_auto(0.7, 20, cfg) - 0.75) <= 1e-12, "volume-adjusted");
    cfg.scaling = 0.1;
    o.require(std::abs(tau_auto(0.94, 30, cfg) - 0.95) <= 1e-12, "clamp");
    const auto s = vtest::sweep_tau_monotone(10000, 108);
    o.absorb(s, "monotone in N");
    o.note(std::to_string(s.cases) + " configs");
    return o;
}

Outcome check_fusion() {
    Outcome o;
    const auto agree = combine(to_mass(Verdict::Supports, 0.8), to_mass(Verdict::Supports, 0.8));
    o.require(agree && std::abs(agree->m_support - 0.96) <= 1e-6, "support mass");
    const auto clash = combine(to_mass(Verdict::Supports, 0.8), to_mass(Verdict::Refutes, 0.8));
    o.require(clash && std::abs(clash->m_support - clash->m_refute) <= 1e-6 && decide(*clash) == Verdict::Neutral,
              "symmetric conflict");
    const auto s = vtest::sweep_wbu_permutations(5000, 109);
    o.absorb(s, "permutations");
    o.require(s.worst <= 1e-9, "permutation drift " + fmt(s.worst));
    o.note(std::to_string(s.cases) + " vote sets, drift " + fmt(s.worst));
    return o;
}

Outcome check_determinism() {
    Outcome o;
    vtest::ScratchDir a("accept-a"), b("accept-b");
    std::vector<std::string> runs, reports;
    double worst = 0.0;
    for (const vtest::ScratchDir* d : {&a, &b}) {
        vtest::json cfg = vtest::fixture_config(*d / "out");
        cfg["paths"]["prompts"] = VERIRAG_PROMPTS_DIR;
        vtest::spit(*d / "config.json", cfg.dump(2));
        const std::string base = "--config '" + (*d / "config.json").string() + "' ";
        const auto t0 = std::chrono::steady_clock::now();
        const auto v = vtest::run_cli(base + "--mock --seed 7 verify");
        worst = std::max(worst, seconds_since(t0));
        o.require(v.status == 0, "verify exited " + std::to_string(v.status) + ": " + v.output);
        const auto r = vtest::run_cli(base + "report");
        o.require(r.status == 0, "report exited " + std::to_string(r.status));
        runs.push_back(vtest::slurp(*d / "out" / "run.json"));
        reports.push_back(vtest::slurp(*d / "out" / "report.json") + vtest::slurp(*d / "out" / "report.txt"));
    }
    if (!o.ok) return o;
    const auto run = vtest::json::parse(runs[0]);
    o.require(run["records"].size() == 200, std::to_string(run["records"].size()) + " records");
    o.require(run["failures"].empty(), "cells failed");
    o.require(runs[0] == runs[1], "run files differ");
    o.require(reports[0] == reports[1], "reports differ");
    o.require(worst < 60.0, "matrix took " + fmt(worst) + " s");
    o.note("200 cells, slowest run " + fmt(worst) + " s, single platform");
    return o;
}

Outcome check_ablation() {
    Outcome o;
    vtest::FixtureEngine e(7);
    MatrixSpec spec{{}, {Method::VERIRAG}, {kAllScenarios.begin(), kAllScenarios.end()}, 0};
    const auto full = e.run(spec);
    const auto no_red = e.run(spec, {true, true, false});
    const auto no_thr = e.run(spec, {true, false, true});
    const auto no_hv = e.run(spec, {false, true, true});
    const std::size_t n = full.records.size();
    o.require(n > 0 && no_red.records.size() == n && no_thr.records.size() == n && no_hv.records.size() == n,
              "record counts differ");
    if (!o.ok) return o;
    std::size_t moved_w = 0, moved_tau = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = *full.records[i].trace;
        const auto& nr = *no_red.records[i].trace;
        const auto& nt = *no_thr.records[i].trace;
        const auto& nh = *no_hv.records[i].trace;
        const std::string cell = full.records[i].claim_id + "/" + to_string(full.records[i].scenario);

        o.require(f.documents.size() == nr.documents.size(), cell + ": document sets differ");
        for (std::size_t d = 0; d < std::min(f.documents.size(), nr.documents.size()); ++d) {
            const auto& x = f.documents[d];
            const auto& y = nr.documents[d];
            o.require(x.quality == y.quality && x.stance == y.stance && x.chunk_ids == y.chunk_ids,
                      cell + ": redundancy flag moved a non-weight field");
            o.require(y.weight == 1.0 && y.eta == y.quality, cell + ": redundancy off but weight applied");
            if (x.weight != y.weight) ++moved_w;
        }
        o.require(to_json(*nr.threshold) == to_json(*f.threshold), cell + ": redundancy flag moved tau");

        o.require(to_json(nt)["documents"] == to_json(f)["documents"] && nt.tallies == f.tallies && nt.hv == f.hv,
                  cell + ": threshold flag moved evidence fields");
        o.require(!nt.threshold && nt.tau == 0.5, cell + ": fixed threshold not 0.5");
        if (f.tau != nt.tau) ++moved_tau;

        o.require(!nh.hv && nh.majority && nh.tallies == f.tallies && to_json(nh)["documents"] == to_json(f)["documents"],
                  cell + ": hv flag moved evidence fields");
    }
    o.require(moved_w > 0, "redundancy flag never changed a weight");
    o.require(moved_tau > 0, "threshold flag never changed tau");
    o.note(std::to_string(n) + " cells, " + std::to_string(moved_w) + " weights and " + std::to_string(moved_tau) +
           " thresholds moved");
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
        {"proposition suite", check_propositions},
        {"formula oracles", check_formula_oracles},
        {"ridge correctness", check_ridge},
        {"grid search oracle", check_grid_search},
        {"metric oracles", check_metric_oracles},
        {"tfidf redundancy", check_redundancy},
        {"dynamic threshold", check_threshold},
        {"wbu fusion", check_fusion},
        {"end-to-end determinism", check_determinism},
        {"ablation semantics", check_ablation},
    };
    int failed = 0;
    for (const auto& [name, check] : checks) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << (o.ok ? "PASS " : "FAIL ") << name << " (" << o.detail << ")\n" << std::flush;
        failed += o.ok ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed\n" : std::to_string(failed) + " criteria failed\n");
    return failed == 0 ? 0 : 1;
}
