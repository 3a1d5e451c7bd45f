#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/properties.hpp"
#include "verirag/calibration.hpp"

using namespace verirag;

TEST(RidgeFit, NormalEquationResidual) {
    const auto s = vtest::sweep_ridge_residual(200, 10);
    EXPECT_TRUE(s.ok()) << s.first_failure << " worst " << s.worst;
}

TEST(RidgeFit, VanishingGammaMatchesExactSolve) {
    const auto s = vtest::sweep_ridge_limit(300, 11);
    EXPECT_GE(s.cases, 100u);
    EXPECT_TRUE(s.ok()) << s.first_failure << " worst " << s.worst;
}

TEST(RidgeFit, ConstantTargets) {
    vtest::Gen g(12);
    Eigen::MatrixXd x(30, 5);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 5; ++j) x(i, j) = g.real(-1, 1);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 0.5);
    for (double gamma : {0.01, 1.0, 100.0}) {
        const auto m = ridge_fit(x, y, gamma);
        EXPECT_NEAR(m.intercept, 0.5, 1e-12);
        for (double w : m.weights) EXPECT_NEAR(w, 0.0, 1e-12);
    }
}

TEST(RidgeFit, SingleSampleHasNoSlope) {
    Eigen::MatrixXd x(1, 1);
    x(0, 0) = 1.0;
    Eigen::VectorXd y(1);
    y(0) = 1.0;
    const auto m = ridge_fit(x, y, 1.0);
    EXPECT_EQ(m.weights[0], 0.0);
    EXPECT_EQ(m.intercept, 1.0);
}

TEST(RidgeFit, ShrinkageWithGamma) {
    vtest::Gen g(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = g.integer(3, 30), p = g.integer(1, 6);
        Eigen::MatrixXd x(n, p);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) x(i, j) = g.real(-2, 2);
            y(i) = g.real(-1, 1);
        }
        double prev = std::numeric_limits<double>::infinity();
        for (double gamma : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
            const auto m = ridge_fit(x, y, gamma);
            const double norm = Eigen::Map<const Eigen::VectorXd>(m.weights.data(), p).norm();
            EXPECT_LE(norm, prev * (1 + 1e-12));
            prev = norm;
        }
    }
}

TEST(RidgeFit, RejectsBadInput) {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    Eigen::VectorXd y(2);
    y << 1, std::nan("");
    EXPECT_THROW(ridge_fit(x, y, 1.0), PreconditionError);
    y << 1, 2;
    EXPECT_THROW(ridge_fit(x, y, 0.0), PreconditionError);
    EXPECT_THROW(ridge_fit(x, Eigen::VectorXd(3), 1.0), PreconditionError);
}

namespace {

CalibrationRecord rec(HumanVerdict v, Tallies t, std::size_t evidence) {
    CalibrationRecord r;
    r.required_standard = RequiredStandard::PlausibleEvidence;
    r.human_verdict = v;
    r.tallies = t;
    r.evidence_count = evidence;
    return r;
}

// prior 0.6 and boldness 0.4 give tau_base 0.5; 40 documents against N_base 2 clamp to 0.95
struct GridFixture {
    ThresholdConfig cfg;
    RidgeModel ridge;
    GridFixture() {
        ridge.intercept = 0.4;
        cfg.n_base = 2;
        cfg.scaling = 0.05;
    }
};

} // namespace

TEST(GridSearch, TieGoesToSmallestCell) {
    GridFixture s;
    const std::vector<CalibrationRecord> r = {rec(HumanVerdict::Support, {5, 0, 0}, 2)};
    const Grid grid{{0.0, 1.0, 2.0}, {0.1, 0.5, 1.0}};
    const auto out = grid_search(r, grid, s.cfg, s.ridge);
    EXPECT_EQ(out.params.alpha, 0.0);
    EXPECT_EQ(out.params.lambda, 0.1);
    EXPECT_EQ(out.correct, 1u);
}

TEST(GridSearch, UniqueArgmax) {
    GridFixture s;
    const std::vector<CalibrationRecord> r = {rec(HumanVerdict::Contradict, {1, 0, 1}, 2),
                                              rec(HumanVerdict::Contradict, {5, 0, 0}, 40)};
    const Grid grid{{0.0, 5.0}, {0.1, 10.0}};
    const auto out = grid_search(r, grid, s.cfg, s.ridge);
    EXPECT_EQ(out.params.alpha, 5.0);
    EXPECT_EQ(out.params.lambda, 10.0);
    EXPECT_EQ(out.correct, 2u);
    EXPECT_EQ(out.accuracy(), 1.0);
}

TEST(GridSearch, UncertainExcludedFromObjective) {
    GridFixture s;
    const std::vector<CalibrationRecord> r = {rec(HumanVerdict::Support, {5, 0, 0}, 2),
                                              rec(HumanVerdict::Uncertain, {0, 5, 0}, 2)};
    const auto out = grid_search(r, Grid{{0.0}, {0.1}}, s.cfg, s.ridge);
    EXPECT_EQ(out.decidable, 1u);
    EXPECT_EQ(out.correct, 1u);
}

TEST(GridSearch, Errors) {
    GridFixture s;
    const std::vector<CalibrationRecord> r = {rec(HumanVerdict::Support, {1, 0, 0}, 2)};
    EXPECT_THROW(grid_search(r, Grid{{}, {0.1}}, s.cfg, s.ridge), PreconditionError);
    EXPECT_THROW(grid_search(r, Grid{{0.0}, {0.0}}, s.cfg, s.ridge), ConfigError);
    EXPECT_THROW(grid_search({}, Grid{{0.0}, {0.1}}, s.cfg, s.ridge), PreconditionError);
}

TEST(GridSearch, MatchesExhaustiveOracle) {
    const auto s = vtest::sweep_grid_search(50, 20, 14);
    EXPECT_TRUE(s.ok()) << s.first_failure;
}

TEST(GridSearch, ParallelAndSerialAgree) {
    vtest::Gen g(15);
    for (int k = 0; k < 10; ++k) {
        const auto c = vtest::random_grid_case(g, 2000);
        Grid big = Grid::defaults();
        const auto a = grid_search(c.records, big, c.cfg, c.ridge, 1);
        const auto b = grid_search(c.records, big, c.cfg, c.ridge, 8);
        EXPECT_EQ(a.params.alpha, b.params.alpha);
        EXPECT_EQ(a.params.lambda, b.params.lambda);
        EXPECT_EQ(a.correct, b.correct);
    }
}

TEST(GridSearch, OptimalOverEveryCell) {
    vtest::Gen g(16);
    for (int k = 0; k < 20; ++k) {
        const auto c = vtest::random_grid_case(g, 30);
        const auto best = grid_search(c.records, c.grid, c.cfg, c.ridge);
        for (double a : c.grid.alpha_values)
            for (double l : c.grid.lambda_values) {
                const auto one = grid_search(c.records, Grid{{a}, {l}}, c.cfg, c.ridge);
                EXPECT_LE(one.correct, best.correct);
            }
    }
}

TEST(Grid, DefaultsAndRange) {
    const Grid g = Grid::defaults();
    EXPECT_EQ(g.alpha_values.size(), 41u);
    EXPECT_EQ(g.lambda_values.size(), 40u);
    EXPECT_EQ(g.alpha_values.back(), 2.0);
    EXPECT_EQ(g.lambda_values.front(), 0.05);
    EXPECT_NO_THROW(g.validate());
    EXPECT_EQ(Grid::range(0.0, 1.0, 0.25).size(), 5u);
}

TEST(SimulateFlawedAudit, Deterministic) {
    const auto a = simulate_flawed_audit(99, ApplicabilityMask::all());
    const auto b = simulate_flawed_audit(99, ApplicabilityMask::all());
    EXPECT_EQ(a, b);
}

TEST(SimulateFlawedAudit, FailCountInRange) {
    std::set<std::size_t> seen;
    vtest::Gen g(17);
    for (std::uint64_t seed = 0; seed < 3000; ++seed) {
        ApplicabilityMask m;
        while (m.count() < 4)
            for (auto id : kAllChecks) m.set(id, m.applicable(id) || g.coin(0.3));
        const auto a = simulate_flawed_audit(seed, m);
        std::size_t fails = 0;
        for (const auto& [id, s] : a.scores) {
            EXPECT_TRUE(m.applicable(id));
            EXPECT_TRUE(s == 0.0 || s == 1.0);
            fails += s == 0.0;
        }
        EXPECT_EQ(a.scores.size(), m.count());
        EXPECT_GE(fails, 2u);
        EXPECT_LE(fails, 4u);
        seen.insert(fails);
    }
    EXPECT_EQ(seen, (std::set<std::size_t>{2, 3, 4}));
}

TEST(SimulateFlawedAudit, DegenerateSets) {
    EXPECT_TRUE(simulate_flawed_audit(1, ApplicabilityMask{}).scores.empty());
    ApplicabilityMask one;
    one.set(CheckId::C5);
    const auto a = simulate_flawed_audit(1, one);
    ASSERT_EQ(a.scores.size(), 1u);
    EXPECT_EQ(a.scores.at(CheckId::C5), 0.0);
}

TEST(CalibrationRecords, JsonLines) {
    std::istringstream in(
        "{\"specificity\":7,\"testability\":6,\"required_standard\":\"Robust Study\",\"boldness_target\":0.4,"
        "\"tallies\":{\"H_S\":1.2,\"H_R\":0.3,\"H_N\":0.1},\"human_verdict\":\"Support\",\"confidence\":80}\n\n"
        "{\"specificity\":2,\"testability\":3,\"required_standard\":\"SettledScience\",\"boldness_target\":0.9,"
        "\"tallies\":{\"H_S\":0,\"H_R\":2,\"H_N\":0},\"human_verdict\":\"Contradict\",\"confidence\":55,"
        "\"evidence_count\":4}\n");
    const auto recs = load_calibration_records(in, "mem");
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].required_standard, RequiredStandard::RobustStudy);
    EXPECT_EQ(recs[0].tallies.support, 1.2);
    EXPECT_EQ(recs[1].human_verdict, HumanVerdict::Contradict);
    EXPECT_EQ(recs[1].evidence_count, 4u);
    EXPECT_FALSE(recs[0].evidence_count);
}

TEST(CalibrationRecords, Rejections) {
    auto bad = [](const std::string& line) {
        std::istringstream in(line);
        EXPECT_THROW(load_calibration_records(in, "mem"), SchemaError) << line;
    };
    const std::string ok = "\"specificity\":7,\"testability\":6,\"required_standard\":\"Robust Study\","
                           "\"boldness_target\":0.4,\"tallies\":{\"H_S\":1,\"H_R\":0,\"H_N\":0},";
    bad("{" + ok + "\"human_verdict\":\"Support\",\"confidence\":101}");
    bad("{" + ok + "\"human_verdict\":\"Maybe\",\"confidence\":10}");
    bad("{" + ok + "\"human_verdict\":\"Support\",\"confidence\":10,\"typo\":1}");
    bad("{not json");
}

TEST(Calibrate, ShippedFixtureMatchesOracle) {
    std::ifstream in(std::string(VERIRAG_FIXTURE_DIR) + "/calibration.jsonl");
    const auto recs = load_calibration_records(in, "calibration.jsonl");
    ASSERT_EQ(recs.size(), 60u);
    ThresholdConfig cfg;
    const auto out = calibrate(recs, Grid::defaults(), cfg, 1.0);
    vtest::GridCase c{recs, Grid::defaults(), cfg, out.ridge};
    const auto [a, l, n] = vtest::oracle_grid_argmax(c);
    EXPECT_EQ(out.search.params.alpha, a);
    EXPECT_EQ(out.search.params.lambda, l);
    EXPECT_EQ(out.search.correct, n);
}
