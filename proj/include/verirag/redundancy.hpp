#pragma once
// Lexical redundancy of retrieved evidence: TF-IDF vectors, cosine similarity,
// per-chunk redundancy against preceding chunks and per-document weights.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "verirag/error.hpp"

namespace verirag {

struct TokenizerOptions {
    // Tokens shorter than this are discarded.
    std::size_t min_length = 1;
};

// ASCII-lowercases and splits on runs of non-alphanumeric bytes. Bytes >= 0x80
// are kept as token characters so UTF-8 words survive intact.
inline std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& opts = {}) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && cur.size() >= opts.min_length) tokens.push_back(cur);
        cur.clear();
    };
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
            cur.push_back(ch);
        } else if (c >= 'A' && c <= 'Z') {
            cur.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

// Sparse vector keyed by vocabulary index. Kept sorted by index.
struct SparseVector {
    std::vector<std::pair<std::size_t, double>> entries;

    bool empty() const noexcept { return entries.empty(); }

    double norm() const {
        double s = 0.0;
        for (const auto& [i, w] : entries) s += w * w;
        return std::sqrt(s);
    }

    double weight(std::size_t index) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), index,
                                   [](const auto& e, std::size_t i) { return e.first < i; });
        return (it != entries.end() && it->first == index) ? it->second : 0.0;
    }
};

class TfIdfModel {
public:
    TfIdfModel(std::map<std::string, std::size_t> vocabulary,
               std::vector<std::size_t> document_frequency,
               std::size_t corpus_size,
               TokenizerOptions opts)
        : vocabulary_(std::move(vocabulary)),
          df_(std::move(document_frequency)),
          corpus_size_(corpus_size),
          opts_(opts) {}

    std::size_t corpus_size() const noexcept { return corpus_size_; }
    std::size_t vocabulary_size() const noexcept { return df_.size(); }
    const std::map<std::string, std::size_t>& vocabulary() const noexcept { return vocabulary_; }

    std::optional<std::size_t> index_of(const std::string& term) const {
        auto it = vocabulary_.find(term);
        if (it == vocabulary_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t document_frequency(const std::string& term) const {
        auto idx = index_of(term);
        return idx ? df_[*idx] : 0;
    }

    // Smoothed idf: ln((1 + N) / (1 + df)) + 1.
    double idf(std::size_t index) const {
        return std::log((1.0 + static_cast<double>(corpus_size_)) /
                        (1.0 + static_cast<double>(df_.at(index)))) + 1.0;
    }

    // Raw-count tf times idf, L2-normalized. Out-of-vocabulary terms are ignored;
    // a text with no known terms yields the empty vector.
    SparseVector transform(std::string_view text) const {
        std::map<std::size_t, double> counts;
        for (const auto& tok : tokenize(text, opts_))
            if (auto idx = index_of(tok)) counts[*idx] += 1.0;
        SparseVector v;
        v.entries.reserve(counts.size());
        for (const auto& [i, tf] : counts) v.entries.emplace_back(i, tf * idf(i));
        const double n = v.norm();
        if (n > 0.0)
            for (auto& e : v.entries) e.second /= n;
        else
            v.entries.clear();
        return v;
    }

private:
    std::map<std::string, std::size_t> vocabulary_;
    std::vector<std::size_t> df_;
    std::size_t corpus_size_;
    TokenizerOptions opts_;
};

// Vocabulary indices follow lexicographic term order.
inline TfIdfModel tfidf_fit(std::span<const std::string> chunks, const TokenizerOptions& opts = {}) {
    if (chunks.empty()) throw PreconditionError("tfidf_fit: empty chunk list");
    std::map<std::string, std::size_t> df_by_term;
    for (const auto& chunk : chunks) {
        const auto toks = tokenize(chunk, opts);
        const std::set<std::string> uniq(toks.begin(), toks.end());
        for (const auto& t : uniq) ++df_by_term[t];
    }
    if (df_by_term.empty()) throw PreconditionError("tfidf_fit: no vocabulary");

    std::map<std::string, std::size_t> vocab;
    std::vector<std::size_t> df;
    df.reserve(df_by_term.size());
    for (const auto& [term, count] : df_by_term) {
        vocab.emplace(term, df.size());
        df.push_back(count);
    }
    return TfIdfModel(std::move(vocab), std::move(df), chunks.size(), opts);
}

// Dot product of two normalized vectors, clamped to [0, 1].
inline double cosine(const SparseVector& u, const SparseVector& v) {
    if (u.empty() || v.empty()) return 0.0;
    double dot = 0.0;
    auto a = u.entries.begin();
    auto b = v.entries.begin();
    while (a != u.entries.end() && b != v.entries.end()) {
        if (a->first < b->first) ++a;
        else if (b->first < a->first) ++b;
        else {
            dot += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return std::clamp(dot, 0.0, 1.0);
}

// rho_j = max_{i<j} cosine(chunk_i, chunk_j); rho_0 = 0.
inline std::vector<double> chunk_redundancy(std::span<const SparseVector> chunks) {
    std::vector<double> rho(chunks.size(), 0.0);
    for (std::size_t j = 1; j < chunks.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) rho[j] = std::max(rho[j], cosine(chunks[i], chunks[j]));
    return rho;
}

struct DocumentRedundancy {
    double rho = 0.0;    // mean chunk redundancy
    double weight = 1.0; // information-gain weight, 1 - rho
};

inline DocumentRedundancy document_weight(std::span<const double> chunk_rhos) {
    if (chunk_rhos.empty())
        throw PreconditionError("document_weight: document has no retrieved chunks");
    for (double r : chunk_rhos)
        if (!(r >= 0.0 && r <= 1.0)) throw PreconditionError("document_weight: redundancy outside [0,1]");
    const double mean = std::accumulate(chunk_rhos.begin(), chunk_rhos.end(), 0.0) /
                        static_cast<double>(chunk_rhos.size());
    const double rho = std::clamp(mean, 0.0, 1.0);
    return {rho, 1.0 - rho};
}

// One chunk of a claim's evidence list, in retrieval order.
struct EvidenceText {
    std::string doc_id;
    std::string text;
};

// Per-claim pipeline: fit TF-IDF over the distinct chunk texts, score each
// chunk against its predecessors and average per document. Exact duplicate
// texts do not alter the fitted model.
inline std::map<std::string, DocumentRedundancy> evidence_weights(std::span<const EvidenceText> evidence,
                                                                  const TokenizerOptions& opts = {}) {
    std::map<std::string, DocumentRedundancy> out;
    if (evidence.empty()) return out;

    std::vector<std::string> distinct;
    std::set<std::string_view> seen;
    for (const auto& e : evidence)
        if (seen.insert(e.text).second) distinct.push_back(e.text);

    std::vector<SparseVector> vecs;
    vecs.reserve(evidence.size());
    bool has_vocab = false;
    for (const auto& t : distinct)
        if (!tokenize(t, opts).empty()) has_vocab = true;
    if (has_vocab) {
        const TfIdfModel model = tfidf_fit(distinct, opts);
        for (const auto& e : evidence) vecs.push_back(model.transform(e.text));
    } else {
        vecs.resize(evidence.size());
    }

    std::vector<double> rho = chunk_redundancy(vecs);
    // Verbatim repeats are fully redundant even when they carry no vocabulary.
    std::set<std::string_view> earlier;
    for (std::size_t i = 0; i < evidence.size(); ++i)
        if (!earlier.insert(evidence[i].text).second) rho[i] = 1.0;
    std::map<std::string, std::vector<double>> by_doc;
    for (std::size_t i = 0; i < evidence.size(); ++i) by_doc[evidence[i].doc_id].push_back(rho[i]);
    for (const auto& [doc, rhos] : by_doc) out.emplace(doc, document_weight(rhos));
    return out;
}

} // namespace verirag
