#pragma once
// Corpus manifest ingestion, chunk storage, embeddings, retrieval and
// temporal-scenario filtering. A directory-of-files layout:
//
//   manifest.json   {documents, claims, scenarios, evidence_map, chunk_store?}
//   analysis files  one JSON per document (or inline "analysis")
//   chunk store     JSON lines {id, doc_id, ordinal, text} (or inline "chunks")

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "verirag/core_model.hpp"
#include "verirag/error.hpp"
#include "verirag/hash.hpp"
#include "verirag/llm_client.hpp"
#include "verirag/prompts.hpp"
#include "verirag/redundancy.hpp"

namespace verirag {

struct EvidenceChunk {
    std::string id;
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
    std::optional<std::vector<double>> embedding;
};

struct Document {
    std::string id;
    std::string title;
    std::string source_uri;
    bool retracted = false;
    std::optional<AnalysisDocument> analysis;
    std::vector<EvidenceChunk> chunks;
    std::optional<std::string> full_text;

    // Explicit full text, else the chunks joined by blank lines.
    std::string text() const {
        if (full_text) return *full_text;
        std::string out;
        for (const auto& c : chunks) out += (out.empty() ? "" : "\n\n") + c.text;
        return out;
    }
};

enum class ScenarioLabel { TY0, TY1, TY3, TY5 };

inline constexpr std::array<ScenarioLabel, 4> kAllScenarios = {ScenarioLabel::TY0, ScenarioLabel::TY1,
                                                               ScenarioLabel::TY3, ScenarioLabel::TY5};

inline std::string to_string(ScenarioLabel s) {
    switch (s) {
    case ScenarioLabel::TY0: return "TY0";
    case ScenarioLabel::TY1: return "TY1";
    case ScenarioLabel::TY3: return "TY3";
    case ScenarioLabel::TY5: return "TY5";
    }
    return {};
}

inline std::optional<ScenarioLabel> parse_scenario(std::string_view s) {
    for (auto l : kAllScenarios)
        if (detail::squash(s) == detail::squash(to_string(l))) return l;
    return std::nullopt;
}

struct Scenario {
    ScenarioLabel label = ScenarioLabel::TY0;
    std::set<std::string> member_doc_ids;

    bool contains(const std::string& doc_id) const { return member_doc_ids.contains(doc_id); }
};

struct ChunkRef {
    std::size_t doc = 0;
    std::size_t ordinal = 0;
};

class Corpus {
public:
    std::vector<Document> documents; // manifest order
    std::vector<Claim> claims;       // manifest order
    std::map<ScenarioLabel, Scenario> scenarios;
    std::map<std::string, std::vector<std::string>> evidence_map; // claim id -> chunk ids

    const Document& document(const std::string& id) const {
        auto it = doc_index_.find(id);
        if (it == doc_index_.end()) throw PreconditionError("unknown document '" + id + "'");
        return documents[it->second];
    }
    bool has_document(const std::string& id) const { return doc_index_.contains(id); }

    const EvidenceChunk& chunk(const std::string& id) const {
        auto it = chunk_index_.find(id);
        if (it == chunk_index_.end()) throw PreconditionError("unknown chunk '" + id + "'");
        return documents[it->second.doc].chunks[it->second.ordinal];
    }
    EvidenceChunk& chunk(const std::string& id) {
        return const_cast<EvidenceChunk&>(static_cast<const Corpus&>(*this).chunk(id));
    }
    bool has_chunk(const std::string& id) const { return chunk_index_.contains(id); }

    const Claim& claim(const std::string& id) const {
        for (const auto& c : claims)
            if (c.id == id) return c;
        throw PreconditionError("unknown claim '" + id + "'");
    }

    const Scenario& scenario(ScenarioLabel l) const {
        auto it = scenarios.find(l);
        if (it == scenarios.end()) throw PreconditionError("scenario " + to_string(l) + " is not defined");
        return it->second;
    }

    std::size_t chunk_count() const {
        std::size_t n = 0;
        for (const auto& d : documents) n += d.chunks.size();
        return n;
    }

    // All chunks in (doc_id, ordinal) order.
    std::vector<const EvidenceChunk*> all_chunks() const {
        std::vector<const EvidenceChunk*> out;
        for (const auto& d : documents)
            for (const auto& c : d.chunks) out.push_back(&c);
        std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
            return std::tie(a->doc_id, a->ordinal) < std::tie(b->doc_id, b->ordinal);
        });
        return out;
    }

    // Rebuilds lookup tables and enforces referential integrity.
    void reindex() {
        doc_index_.clear();
        chunk_index_.clear();
        for (std::size_t i = 0; i < documents.size(); ++i) {
            const auto& d = documents[i];
            if (d.id.empty()) throw IngestError("document with empty id");
            if (!doc_index_.emplace(d.id, i).second) throw IngestError("duplicate document id '" + d.id + "'");
            for (std::size_t k = 0; k < d.chunks.size(); ++k) {
                const auto& c = d.chunks[k];
                if (c.ordinal != k)
                    throw IngestError("document '" + d.id + "': chunk ordinals must be dense 0.." +
                                      std::to_string(d.chunks.size() - 1));
                if (c.doc_id != d.id) throw IngestError("chunk '" + c.id + "' belongs to '" + c.doc_id + "'");
                if (!chunk_index_.emplace(c.id, ChunkRef{i, k}).second)
                    throw IngestError("duplicate chunk id '" + c.id + "'");
            }
        }
        std::set<std::string> claim_ids;
        for (const auto& c : claims)
            if (!claim_ids.insert(c.id).second) throw IngestError("duplicate claim id '" + c.id + "'");
        for (const auto& [label, sc] : scenarios)
            for (const auto& id : sc.member_doc_ids)
                if (!doc_index_.contains(id))
                    throw IngestError("scenario " + to_string(label) + " references unknown document '" + id + "'");
        for (const auto& [claim_id, chunk_ids] : evidence_map) {
            if (!claim_ids.contains(claim_id))
                throw IngestError("evidence_map references unknown claim '" + claim_id + "'");
            for (const auto& cid : chunk_ids)
                if (!chunk_index_.contains(cid))
                    throw IngestError("evidence_map for claim '" + claim_id + "' references unknown chunk '" + cid +
                                      "'");
        }
        check_nesting();
    }

private:
    void check_nesting() const {
        auto subset = [&](ScenarioLabel a, ScenarioLabel b) {
            auto ia = scenarios.find(a), ib = scenarios.find(b);
            if (ia == scenarios.end() || ib == scenarios.end()) return;
            for (const auto& id : ia->second.member_doc_ids)
                if (!ib->second.contains(id))
                    throw IngestError("scenario nesting violated: '" + id + "' is in " + to_string(a) + " but not " +
                                      to_string(b));
        };
        subset(ScenarioLabel::TY0, ScenarioLabel::TY1);
        subset(ScenarioLabel::TY1, ScenarioLabel::TY3);
        auto t0 = scenarios.find(ScenarioLabel::TY0), t5 = scenarios.find(ScenarioLabel::TY5);
        if (t0 != scenarios.end() && t5 != scenarios.end())
            for (const auto& id : t0->second.member_doc_ids)
                if (documents[doc_index_.at(id)].retracted && t5->second.contains(id))
                    throw IngestError("TY5 must exclude retracted TY0 document '" + id + "'");
    }

    std::map<std::string, std::size_t> doc_index_;
    std::map<std::string, ChunkRef> chunk_index_;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline json read_json_file(const std::filesystem::path& p, const char* what) {
    std::ifstream in(p);
    if (!in) throw IngestError(std::string("cannot open ") + what + " " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IngestError(std::string("malformed ") + what + " " + p.string() + ": " + e.what());
    }
}

inline EvidenceChunk chunk_from_json(const json& j, const std::string& doc_id, std::size_t position,
                                     const std::string& where) {
    if (!j.is_object()) throw IngestError(where + ": chunk must be an object");
    EvidenceChunk c;
    c.doc_id = doc_id;
    c.ordinal = j.contains("ordinal") ? j["ordinal"].get<std::size_t>() : position;
    c.id = j.contains("id") ? j["id"].get<std::string>() : doc_id + "#" + std::to_string(c.ordinal);
    if (!j.contains("text") || !j["text"].is_string()) throw IngestError(where + ": chunk '" + c.id + "' lacks text");
    c.text = j["text"].get<std::string>();
    return c;
}

} // namespace detail

inline Corpus ingest(const std::filesystem::path& manifest_path) {
    const json m = detail::read_json_file(manifest_path, "manifest");
    if (!m.is_object()) throw IngestError("manifest must be a JSON object");
    const auto base = manifest_path.parent_path();
    Corpus corpus;

    try {
        for (const auto& key : {"documents", "claims"})
            if (!m.contains(key) || !m[key].is_array()) throw IngestError(std::string("manifest lacks '") + key + "' array");

        for (const json& dj : m["documents"]) {
            Document d;
            d.id = detail::require_string(dj, "id", "document");
            const std::string where = "document '" + d.id + "'";
            d.title = dj.value("title", "");
            d.source_uri = dj.value("source_uri", "");
            d.retracted = dj.value("retracted", false);
            if (dj.contains("full_text")) d.full_text = dj["full_text"].get<std::string>();
            if (dj.contains("analysis")) {
                d.analysis = analysis_from_json(dj["analysis"], where + " analysis");
            } else if (dj.contains("analysis_file")) {
                d.analysis = analysis_from_json(
                    detail::read_json_file(base / dj["analysis_file"].get<std::string>(), "analysis file"),
                    where + " analysis");
            }
            if (dj.contains("chunks")) {
                std::size_t pos = 0;
                for (const json& cj : dj["chunks"]) d.chunks.push_back(detail::chunk_from_json(cj, d.id, pos++, where));
            }
            corpus.documents.push_back(std::move(d));
        }

        if (m.contains("chunk_store")) {
            const auto path = base / m["chunk_store"].get<std::string>();
            std::ifstream in(path);
            if (!in) throw IngestError("cannot open chunk store " + path.string());
            std::map<std::string, std::size_t> pos;
            for (std::size_t i = 0; i < corpus.documents.size(); ++i) pos[corpus.documents[i].id] = i;
            std::string line;
            std::size_t lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                const std::string where = path.filename().string() + ":" + std::to_string(lineno);
                json cj;
                try {
                    cj = json::parse(line);
                } catch (const json::parse_error& e) {
                    throw IngestError(where + ": " + e.what());
                }
                const std::string doc_id = detail::require_string(cj, "doc_id", where);
                auto it = pos.find(doc_id);
                if (it == pos.end()) throw IngestError(where + ": chunk references unknown document '" + doc_id + "'");
                auto& chunks = corpus.documents[it->second].chunks;
                chunks.push_back(detail::chunk_from_json(cj, doc_id, chunks.size(), where));
            }
            for (auto& d : corpus.documents)
                std::stable_sort(d.chunks.begin(), d.chunks.end(),
                                 [](const auto& a, const auto& b) { return a.ordinal < b.ordinal; });
        }

        for (const json& cj : m["claims"]) corpus.claims.push_back(claim_from_json(cj));

        if (m.contains("scenarios")) {
            for (auto it = m["scenarios"].begin(); it != m["scenarios"].end(); ++it) {
                const auto label = parse_scenario(it.key());
                if (!label) throw IngestError("unknown scenario label '" + it.key() + "'");
                Scenario sc{*label, {}};
                for (const auto& id : it.value()) {
                    if (!sc.member_doc_ids.insert(id.get<std::string>()).second)
                        throw IngestError("scenario " + it.key() + " lists '" + id.get<std::string>() + "' twice");
                }
                corpus.scenarios[*label] = std::move(sc);
            }
        }
        if (m.contains("evidence_map"))
            for (auto it = m["evidence_map"].begin(); it != m["evidence_map"].end(); ++it)
                corpus.evidence_map[it.key()] = it.value().get<std::vector<std::string>>();
    } catch (const SchemaError& e) {
        throw IngestError(e.what());
    } catch (const json::exception& e) {
        throw IngestError(std::string("manifest: ") + e.what());
    }

    corpus.reindex();
    return corpus;
}

struct CorpusSummary {
    std::size_t documents = 0;
    std::size_t retracted = 0;
    std::size_t analysed = 0;
    std::size_t chunks = 0;
    std::size_t claims = 0;
    std::size_t mapped_claims = 0;
    std::map<std::string, std::size_t> scenario_sizes;
};

inline CorpusSummary summarize(const Corpus& c) {
    CorpusSummary s;
    s.documents = c.documents.size();
    for (const auto& d : c.documents) {
        s.retracted += d.retracted;
        s.analysed += d.analysis.has_value();
    }
    s.chunks = c.chunk_count();
    s.claims = c.claims.size();
    s.mapped_claims = c.evidence_map.size();
    for (const auto& [l, sc] : c.scenarios) s.scenario_sizes[to_string(l)] = sc.member_doc_ids.size();
    return s;
}

inline json to_json(const CorpusSummary& s) {
    return {{"documents", s.documents}, {"retracted", s.retracted},         {"analysed", s.analysed},
            {"chunks", s.chunks},       {"claims", s.claims},               {"mapped_claims", s.mapped_claims},
            {"scenarios", s.scenario_sizes}};
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;

    std::vector<double> embed_one(const std::string& text) { return embed({text}).at(0); }
};

// Signed feature hashing of token counts, L2-normalised. Offline and
// bit-reproducible; text without tokens maps to the zero vector.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(std::size_t dim = 256, std::uint64_t seed = 0, TokenizerOptions opts = {})
        : dim_(dim), seed_(seed), opts_(opts) {
        if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
    }

    std::size_t dimension() const override { return dim_; }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed_text(t));
        return out;
    }

private:
    std::vector<double> embed_text(std::string_view text) const {
        std::vector<double> v(dim_, 0.0);
        for (const auto& tok : tokenize(text, opts_)) {
            const std::uint64_t h = hash_combine(seed_, fnv1a64(tok));
            v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        if (n > 0.0) {
            n = std::sqrt(n);
            for (double& x : v) x /= n;
        }
        return v;
    }

    std::size_t dim_;
    std::uint64_t seed_;
    TokenizerOptions opts_;
};

// OpenAI-compatible /embeddings endpoint.
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(const LlmSettings& settings, std::string model, std::size_t dim)
        : model_(std::move(model)),
          dim_(dim),
          poster_(settings.base_url, settings.api_key, settings.retry, settings.max_in_flight) {
        if (settings.api_key.empty()) throw ConfigError("LLM_API_KEY is not set");
        if (model_.empty()) throw ConfigError("embedding model is not set");
    }

    std::size_t dimension() const override { return dim_; }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
        const json reply = poster_.post("/embeddings", {{"model", model_}, {"input", texts}});
        std::vector<std::vector<double>> out(texts.size());
        try {
            const auto& data = reply.at("data");
            if (data.size() != texts.size())
                throw TransportError("embedding provider returned " + std::to_string(data.size()) + " vectors for " +
                                     std::to_string(texts.size()) + " inputs");
            for (std::size_t i = 0; i < data.size(); ++i) {
                const std::size_t idx = data[i].value("index", i);
                if (idx >= out.size()) throw TransportError("embedding index out of range");
                out[idx] = data[i].at("embedding").get<std::vector<double>>();
            }
        } catch (const json::exception& e) {
            throw TransportError(std::string("malformed embedding response: ") + e.what());
        }
        return out;
    }

private:
    std::string model_;
    std::size_t dim_;
    JsonPoster poster_;
};

class EmbeddingError : public std::runtime_error {
public:
    EmbeddingError(const std::string& what, std::vector<std::string> unembedded)
        : std::runtime_error(what), unembedded_(std::move(unembedded)) {}
    const std::vector<std::string>& unembedded() const noexcept { return unembedded_; }

private:
    std::vector<std::string> unembedded_;
};

inline void check_embedding(const std::vector<double>& v, std::size_t dim, const std::string& chunk_id) {
    if (v.size() != dim)
        throw TransportError("embedding for '" + chunk_id + "' has dimension " + std::to_string(v.size()) +
                             ", expected " + std::to_string(dim));
    for (double x : v)
        if (!std::isfinite(x)) throw TransportError("embedding for '" + chunk_id + "' has non-finite entries");
}

struct EmbedReport {
    std::size_t embedded = 0;
    std::size_t skipped = 0;                // already embedded
    std::vector<std::string> zero_vectors;  // chunks whose text yields no tokens
};

// Embeds every chunk lacking an embedding, in batches. On provider failure the
// corpus keeps what was embedded so far and EmbeddingError lists the rest.
inline EmbedReport embed_chunks(Corpus& corpus, Embedder& embedder, std::size_t batch_size = 32) {
    EmbedReport report;
    std::vector<EvidenceChunk*> todo;
    for (auto& d : corpus.documents)
        for (auto& c : d.chunks) {
            if (c.embedding && c.embedding->size() == embedder.dimension()) {
                ++report.skipped;
                continue;
            }
            c.embedding.reset();
            todo.push_back(&c);
        }
    batch_size = std::max<std::size_t>(1, batch_size);
    for (std::size_t start = 0; start < todo.size(); start += batch_size) {
        const std::size_t end = std::min(todo.size(), start + batch_size);
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) texts.push_back(todo[i]->text);
        try {
            auto vecs = embedder.embed(texts);
            if (vecs.size() != texts.size()) throw TransportError("embedder returned the wrong number of vectors");
            for (std::size_t i = start; i < end; ++i) check_embedding(vecs[i - start], embedder.dimension(), todo[i]->id);
            for (std::size_t i = start; i < end; ++i) {
                auto& v = vecs[i - start];
                if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }))
                    report.zero_vectors.push_back(todo[i]->id);
                todo[i]->embedding = std::move(v);
                ++report.embedded;
            }
        } catch (const TransportError& e) {
            std::vector<std::string> rest;
            for (std::size_t i = start; i < todo.size(); ++i) rest.push_back(todo[i]->id);
            throw EmbeddingError(std::string(e.what()) + "; " + std::to_string(rest.size()) + " chunks unembedded",
                                 std::move(rest));
        }
    }
    return report;
}

// embeddings.jsonl: one {"chunk_id", "embedding"} object per line, (doc_id, ordinal) order.
inline std::string serialize_embeddings(const Corpus& corpus) {
    std::string out;
    for (const auto* c : corpus.all_chunks()) {
        if (!c->embedding) continue;
        out += json{{"chunk_id", c->id}, {"embedding", *c->embedding}}.dump();
        out += '\n';
    }
    return out;
}

inline std::size_t load_embeddings(Corpus& corpus, const std::filesystem::path& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open embeddings file " + path.string() + " (run `embed` first)");
    std::string line;
    std::size_t n = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(lineno);
        try {
            const json j = json::parse(line);
            const std::string id = j.at("chunk_id").get<std::string>();
            if (!corpus.has_chunk(id)) throw SchemaError(where + ": unknown chunk '" + id + "'");
            auto v = j.at("embedding").get<std::vector<double>>();
            check_embedding(v, dim, id);
            corpus.chunk(id).embedding = std::move(v);
            ++n;
        } catch (const json::exception& e) {
            throw SchemaError(where + ": " + e.what());
        } catch (const TransportError& e) {
            throw SchemaError(where + ": " + e.what());
        }
    }
    return n;
}

// ---------------------------------------------------------------------------
// Retrieval and scenario filtering
// ---------------------------------------------------------------------------

struct ScoredChunk {
    const EvidenceChunk* chunk = nullptr;
    double score = 0.0;
};

inline double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw PreconditionError("embedding dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Top-k chunks by cosine to the claim embedding; ties by (doc_id, ordinal).
inline std::vector<ScoredChunk> retrieve(const std::vector<double>& claim_embedding, const Corpus& corpus, int k) {
    if (k <= 0) throw PreconditionError("retrieval depth k must be positive");
    std::vector<ScoredChunk> scored;
    for (const auto* c : corpus.all_chunks()) {
        if (!c->embedding) throw PreconditionError("chunk '" + c->id + "' has no embedding (run `embed` first)");
        scored.push_back({c, dense_cosine(claim_embedding, *c->embedding)});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.chunk->doc_id, a.chunk->ordinal) < std::tie(b.chunk->doc_id, b.chunk->ordinal);
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
    return scored;
}

inline std::vector<ScoredChunk> retrieve(const Claim& claim, const Corpus& corpus, Embedder& embedder, int k) {
    return retrieve(embedder.embed_one(claim.text), corpus, k);
}

namespace detail {
inline const std::string& doc_of(const EvidenceChunk& c) { return c.doc_id; }
inline const std::string& doc_of(const EvidenceChunk* c) { return c->doc_id; }
inline const std::string& doc_of(const ScoredChunk& c) { return c.chunk->doc_id; }
} // namespace detail

// Order-preserving subset whose doc_id is a scenario member.
template <class T>
std::vector<T> filter_scenario(const std::vector<T>& chunks, const Scenario& scenario) {
    std::vector<T> out;
    for (const auto& c : chunks)
        if (scenario.contains(detail::doc_of(c))) out.push_back(c);
    return out;
}

// N_ev
template <class T>
std::size_t distinct_documents(const std::vector<T>& chunks) {
    std::set<std::string> ids;
    for (const auto& c : chunks) ids.insert(detail::doc_of(c));
    return ids.size();
}

enum class EvidenceSource { EvidenceMap, Retrieval };

inline std::string to_string(EvidenceSource s) { return s == EvidenceSource::EvidenceMap ? "evidence_map" : "retrieval"; }

struct ClaimEvidence {
    std::vector<const EvidenceChunk*> chunks; // redundancy "preceding" order
    EvidenceSource source = EvidenceSource::EvidenceMap;
};

// The manifest's evidence_map wins; otherwise embedding retrieval.
inline ClaimEvidence claim_evidence(const Corpus& corpus, const Claim& claim, Embedder* embedder, int k) {
    ClaimEvidence ev;
    if (auto it = corpus.evidence_map.find(claim.id); it != corpus.evidence_map.end()) {
        for (const auto& id : it->second) ev.chunks.push_back(&corpus.chunk(id));
        return ev;
    }
    if (!embedder) throw PreconditionError("claim '" + claim.id + "' has no evidence_map entry and no embedder");
    ev.source = EvidenceSource::Retrieval;
    for (const auto& s : retrieve(claim, corpus, *embedder, k)) ev.chunks.push_back(s.chunk);
    return ev;
}

} // namespace verirag
