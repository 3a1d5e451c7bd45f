#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "support/gen.hpp"
#include "verirag/redundancy.hpp"

using namespace verirag;

namespace {

std::vector<SparseVector> vectors(const std::vector<std::string>& texts) {
    const auto model = tfidf_fit(texts);
    std::vector<SparseVector> out;
    for (const auto& t : texts) out.push_back(model.transform(t));
    return out;
}

} // namespace

TEST(Tokenize, LowercasesAndSplits) {
    EXPECT_EQ(tokenize("Vitamin-D, 25(OH)D levels!"),
              (std::vector<std::string>{"vitamin", "d", "25", "oh", "d", "levels"}));
    TokenizerOptions two{2};
    EXPECT_EQ(tokenize("a bb c dd", two), (std::vector<std::string>{"bb", "dd"}));
}

TEST(TfIdf, DocumentFrequencies) {
    const std::vector<std::string> chunks = {"a b", "a c"};
    const auto m = tfidf_fit(chunks);
    EXPECT_EQ(m.corpus_size(), 2u);
    EXPECT_EQ(m.document_frequency("a"), 2u);
    EXPECT_EQ(m.document_frequency("b"), 1u);
    EXPECT_EQ(m.document_frequency("c"), 1u);
}

TEST(TfIdf, RawTermCounts) {
    const std::vector<std::string> chunks = {"x x y"};
    const auto m = tfidf_fit(chunks);
    // single document: every idf is 1, so weights are the normalized counts 2:1
    const auto v = m.transform("x x y");
    const double wx = v.weight(*m.index_of("x")), wy = v.weight(*m.index_of("y"));
    EXPECT_NEAR(wx / wy, 2.0, 1e-12);
}

TEST(TfIdf, EmptyCorpusHasNoVocabulary) {
    const std::vector<std::string> blank = {"", "  ,, "};
    EXPECT_THROW(tfidf_fit(blank), PreconditionError);
}

TEST(Cosine, WorkedTwoChunkCorpus) {
    const auto v = vectors({"a b", "a c"});
    // smoothed idf by hand: a -> ln(3/3)+1, b and c -> ln(3/2)+1
    const double ia = 1.0, ib = std::log(1.5) + 1.0;
    const double expected = ia * ia / (ia * ia + ib * ib);
    EXPECT_NEAR(cosine(v[0], v[1]), expected, 1e-12);
    EXPECT_NEAR(cosine(v[0], v[1]), 0.3361, 1e-4);
}

TEST(Cosine, IdenticalAndDisjoint) {
    const auto v = vectors({"alpha beta", "alpha beta", "gamma delta", ""});
    EXPECT_NEAR(cosine(v[0], v[1]), 1.0, 1e-9);
    EXPECT_EQ(cosine(v[0], v[2]), 0.0);
    EXPECT_EQ(cosine(v[3], v[0]), 0.0);
}

TEST(ChunkRedundancy, Examples) {
    auto v = vectors({"alpha beta"});
    EXPECT_EQ(chunk_redundancy(v), std::vector<double>{0.0});

    v = vectors({"alpha beta", "alpha beta"});
    auto r = chunk_redundancy(v);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_NEAR(r[1], 1.0, 1e-9);

    v = vectors({"alpha beta", "gamma delta", "alpha beta"});
    r = chunk_redundancy(v);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[1], 0.0);
    EXPECT_NEAR(r[2], 1.0, 1e-9);
}

TEST(DocumentWeight, Examples) {
    auto w = document_weight(std::vector<double>{0.0, 0.0});
    EXPECT_EQ(w.rho, 0.0);
    EXPECT_EQ(w.weight, 1.0);
    w = document_weight(std::vector<double>{1.0, 1.0});
    EXPECT_EQ(w.rho, 1.0);
    EXPECT_EQ(w.weight, 0.0);
    w = document_weight(std::vector<double>{0.2, 0.6});
    EXPECT_NEAR(w.rho, 0.4, 1e-15);
    EXPECT_NEAR(w.weight, 0.6, 1e-15);
    EXPECT_THROW(document_weight(std::vector<double>{}), PreconditionError);
}

TEST(ChunkRedundancy, MatchesPairwiseMaximum) {
    vtest::Gen g(21);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> texts;
        const int n = g.integer(1, 7);
        for (int i = 0; i < n; ++i) texts.push_back(g.sentence());
        const auto v = vectors(texts);
        const auto rho = chunk_redundancy(v);
        for (int j = 0; j < n; ++j) {
            double m = 0.0;
            for (int i = 0; i < j; ++i) m = std::max(m, cosine(v[i], v[j]));
            EXPECT_EQ(rho[j], m);
            EXPECT_GE(rho[j], 0.0);
            EXPECT_LE(rho[j], 1.0);
        }
    }
}

TEST(ChunkRedundancy, AppendedDuplicateIsFullyRedundant) {
    vtest::Gen g(8);
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> texts;
        const int n = g.integer(1, 6);
        for (int i = 0; i < n; ++i) texts.push_back(g.sentence());
        texts.push_back(texts[g.integer(0, n - 1)]);
        const auto rho = chunk_redundancy(vectors(texts));
        ASSERT_GE(rho.back(), 1.0 - 1e-9);
    }
}

TEST(ChunkRedundancy, PermutationSensitivityByEnumeration) {
    vtest::Gen g(3);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<std::string> texts;
        const int n = g.integer(2, 4);
        for (int i = 0; i < n; ++i) texts.push_back(g.sentence(1, 4));
        const auto model = tfidf_fit(texts);
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        do {
            std::vector<SparseVector> v;
            for (int i : order) v.push_back(model.transform(texts[i]));
            const auto rho = chunk_redundancy(v);
            EXPECT_EQ(rho[0], 0.0);
            // swap each adjacent pair: the chunk moved earlier cannot gain, the one moved later cannot lose
            for (int k = 1; k < n; ++k) {
                auto w = v;
                std::swap(w[k - 1], w[k]);
                const auto rho2 = chunk_redundancy(w);
                EXPECT_LE(rho2[k - 1], rho[k] + 1e-15);
                EXPECT_GE(rho2[k], rho[k - 1] - 1e-15);
            }
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST(EvidenceWeights, DuplicateDocumentWeightCollapses) {
    std::vector<EvidenceText> ev = {{"D1", "statin therapy lowered ldl cholesterol"},
                                    {"D2", "placebo group showed no change"}};
    auto w = evidence_weights(ev);
    EXPECT_NEAR(w.at("D1").weight, 1.0, 1e-12);
    ev.push_back({"D3", "statin therapy lowered ldl cholesterol"});
    w = evidence_weights(ev);
    EXPECT_NEAR(w.at("D3").weight, 0.0, 1e-9);
    EXPECT_NEAR(w.at("D1").weight, 1.0, 1e-12);
}

TEST(EvidenceWeights, VocabularyFreeRepeatsCountAsRedundant) {
    const std::vector<EvidenceText> ev = {{"D1", "--"}, {"D2", "--"}};
    const auto w = evidence_weights(ev);
    EXPECT_EQ(w.at("D1").rho, 0.0);
    EXPECT_EQ(w.at("D2").rho, 1.0);
}
