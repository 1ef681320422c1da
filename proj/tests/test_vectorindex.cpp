#include "inspire/error.hpp"
#include "inspire/scan_kernels.hpp"
#include "inspire/text.hpp"
#include "inspire/vectorindex.hpp"
#include "support/support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using namespace inspire;
using namespace inspire::vectorindex;
using testing_support::TempDir;

namespace {

std::string words(std::size_t n_chars, std::uint32_t seed = 1) {
    std::mt19937 rng(seed);
    return testing_support::random_words(rng, n_chars, n_chars);
}

std::string join_chunks(const std::vector<Chunk>& chunks) {
    std::string out;
    for (const auto& c : chunks) out += c.text;
    return out;
}

// Embeds to a fixed basis vector chosen by the text, so orthogonality is exact.
class BasisEmbedder : public EmbeddingProvider {
public:
    std::size_t dimension() const override { return 4; }
    EmbeddingVector embed(std::string_view text) const override {
        EmbeddingVector v{std::vector<float>(4, 0.0f)};
        v.values[text.empty() ? 0 : static_cast<unsigned char>(text[0]) % 4] = 1.0f;
        return v;
    }
};

// Fails on the n-th embed call.
class FailingEmbedder : public EmbeddingProvider {
public:
    explicit FailingEmbedder(int fail_at) : fail_at_(fail_at) {}
    std::size_t dimension() const override { return kDefaultDimension; }
    EmbeddingVector embed(std::string_view text) const override {
        if (++calls_ == fail_at_) throw std::runtime_error("embedding service timeout");
        return inner_.embed(text);
    }

private:
    int fail_at_;
    mutable int calls_ = 0;
    HashingEmbedder inner_;
};

}  // namespace

// ---- chunking

TEST(Chunking, LongTextSplitsIntoCeilingChunks) {
    const auto text = words(4500);
    const auto chunks = chunk_description(text, IndexConfig{});
    EXPECT_EQ(chunks.size(), 3u);
    EXPECT_EQ(join_chunks(chunks), text);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        EXPECT_EQ(chunks[i].chunk_index, i);
        EXPECT_LE(text::char_count(chunks[i].text), 2000u);
    }
}

TEST(Chunking, ShortTextIsOneChunk) {
    const auto text = words(1999);
    const auto chunks = chunk_description(text, IndexConfig{});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].text, text);
}

TEST(Chunking, LimitIsInclusive) {
    const auto text = words(2000);
    EXPECT_EQ(chunk_description(text, IndexConfig{}).size(), 1u);
}

TEST(Chunking, CutsAfterLastWhitespaceInWindow) {
    IndexConfig c;
    c.chunk_max_chars = 10;
    const auto chunks = chunk_description("alpha beta gamma", c);
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(chunks[0].text, "alpha ");
    EXPECT_EQ(chunks[1].text, "beta gamma");
}

TEST(Chunking, HardCutWithoutWhitespace) {
    IndexConfig c;
    c.chunk_max_chars = 4;
    const auto chunks = chunk_description("abcdefghij", c);
    ASSERT_EQ(chunks.size(), 3u);
    EXPECT_EQ(chunks[0].text, "abcd");
    EXPECT_EQ(chunks[2].text, "ij");
}

TEST(Chunking, NeverSplitsACodePoint) {
    IndexConfig c;
    c.chunk_max_chars = 3;
    const auto chunks = chunk_description("日本語の説明", c);
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(chunks[0].text, "日本語");
    EXPECT_EQ(chunks[1].text, "の説明");
}

TEST(Chunking, EmptyTextHasNoChunks) { EXPECT_TRUE(chunk_description("", IndexConfig{}).empty()); }

TEST(Chunking, LosslessOnRandomStrings) {
    std::mt19937 rng(2024);
    const std::vector<std::string> alphabet = {"a", "b", " ", "\n", "\t", "é", "日", "\xFF", "xyz", "  "};
    for (int i = 0; i < 1000; ++i) {
        std::string s;
        const auto len = rng() % 400;
        for (std::size_t j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
        IndexConfig c;
        c.chunk_max_chars = 1 + rng() % 60;
        const auto chunks = chunk_description(s, c);
        ASSERT_EQ(join_chunks(chunks), s) << "iteration " << i;
        for (const auto& ch : chunks) {
            ASSERT_FALSE(ch.text.empty());
            ASSERT_LE(text::char_count(ch.text), c.chunk_max_chars);
        }
    }
}

// ---- embeddings

TEST(Embedding, CosineSelfSimilarityAndBound) {
    const HashingEmbedder e;
    std::mt19937 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto a = e.embed(testing_support::random_words(rng, 20, 300));
        const auto b = e.embed(testing_support::random_words(rng, 20, 300));
        EXPECT_NEAR(cosine(a.values, a.values), 1.0, 1e-6);
        EXPECT_LE(std::abs(cosine(a.values, b.values)), 1.0 + 1e-9);
        EXPECT_NEAR(cosine(a.values, b.values), cosine(b.values, a.values), 1e-12);
    }
}

TEST(Embedding, HashingEmbedderIsUnitAndDeterministic) {
    const HashingEmbedder e;
    const auto a = e.embed("sleep tracking with smart alarm");
    const auto b = e.embed("sleep tracking with smart alarm");
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.values.size(), kDefaultDimension);
    EXPECT_NEAR(dot(a.values, a.values), 1.0, 1e-6);
}

// ---- index

TEST(Index, StoresOneVectorPerChunk) {
    VectorIndex idx;
    const HashingEmbedder e;
    EXPECT_EQ(idx.add("a", words(4500), e), 3u);
    EXPECT_EQ(idx.chunk_count(), 3u);
}

TEST(Index, ReAddReplacesVectors) {
    VectorIndex idx;
    const HashingEmbedder e;
    idx.add("a", words(4500), e);
    idx.add("a", words(4500, 9), e);
    EXPECT_EQ(idx.chunk_count(), 3u);
    EXPECT_EQ(idx.app_count(), 1u);
}

TEST(Index, ProviderFailureStoresNothingForTheApp) {
    VectorIndex idx;
    const FailingEmbedder failing(2);
    EXPECT_THROW(
        {
            try {
                idx.add("a", words(4500), failing);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::provider_failure);
                throw;
            }
        },
        Error);
    EXPECT_EQ(idx.chunk_count(), 0u);
    EXPECT_FALSE(idx.contains("a"));
}

TEST(Index, ProviderFailureKeepsPreviousVectors) {
    VectorIndex idx;
    const HashingEmbedder e;
    idx.add("a", words(300), e);
    const FailingEmbedder failing(1);
    EXPECT_THROW(idx.add("a", words(4500), failing), Error);
    EXPECT_EQ(idx.chunk_count("a"), 1u);
}

TEST(Index, QueryEqualToDescriptionScoresOne) {
    VectorIndex idx;
    const HashingEmbedder e;
    const auto d = words(800, 3);
    idx.add("self", d, e);
    idx.add("other", words(800, 4), e);
    const auto hits = idx.query(d, 2, e);
    ASSERT_FALSE(hits.empty());
    EXPECT_EQ(hits[0].app_id, "self");
    EXPECT_NEAR(hits[0].score, 1.0, 1e-6);  // float32 storage bounds the error
}

TEST(Index, OrthogonalAppScoresZero) {
    VectorIndex idx(IndexConfig{2000, 4, 3});
    const BasisEmbedder e;
    idx.add("x", "a description", e);  // 'a' -> basis 1
    idx.add("y", "b description", e);  // 'b' -> basis 2
    const auto hits = idx.query("a query", 2, e);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].app_id, "x");
    EXPECT_DOUBLE_EQ(hits[0].score, 1.0);
    EXPECT_DOUBLE_EQ(hits[1].score, 0.0);
}

TEST(Index, TiesBreakByAppIdAscending) {
    VectorIndex idx;
    const HashingEmbedder e;
    const auto d = words(500, 8);
    idx.add("zeta", d, e);
    idx.add("alpha", d, e);
    idx.add("mid", d, e);
    const auto hits = idx.query(d, 3, e);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].app_id, "alpha");
    EXPECT_EQ(hits[1].app_id, "mid");
    EXPECT_EQ(hits[2].app_id, "zeta");
}

TEST(Index, MultiChunkAppAppearsOnce) {
    VectorIndex idx;
    const HashingEmbedder e;
    const auto d = words(6000, 12);
    idx.add("long", d, e);
    idx.add("short", words(300, 13), e);
    const auto hits = idx.query(d.substr(0, 500), 5, e);
    std::set<std::string> ids;
    for (const auto& h : hits) EXPECT_TRUE(ids.insert(h.app_id).second);
    EXPECT_EQ(hits.size(), 2u);
}

TEST(Index, TenAppFixtureMatchesBruteForce) {
    const auto records = testing_support::fixture_corpus(10, 42);
    VectorIndex idx;
    const HashingEmbedder e;
    for (const auto& r : records) idx.add(r.app_id, r.description, e);
    for (const std::string q : {"sleep tracking", "travel flight hotel", "budget and expense report", "x"}) {
        EXPECT_EQ(idx.query(q, 3, e), testing_support::brute_force_query(records, q, 3, e, IndexConfig{})) << q;
    }
}

TEST(Index, MatchesBruteForceOnRandomCorpora) {
    std::mt19937 rng(99);
    const HashingEmbedder e;
    for (int round = 0; round < 5; ++round) {
        IndexConfig config;
        config.chunk_max_chars = 200 + rng() % 800;
        const auto records = testing_support::fixture_corpus(60, static_cast<std::uint32_t>(rng()), 3000, 7);
        VectorIndex idx(config);
        for (const auto& r : records) idx.add(r.app_id, r.description, e);
        ASSERT_LE(idx.chunk_count(), 1000u);
        for (int q = 0; q < 20; ++q) {
            const auto query = testing_support::random_words(rng, 5, 120);
            const std::size_t k = 1 + rng() % 10;
            ASSERT_EQ(idx.query(query, k, e), testing_support::brute_force_query(records, query, k, e, config));
        }
    }
}

TEST(Index, ParallelAndSerialKernelsAgree) {
    const auto records = testing_support::fixture_corpus(120, 5);
    VectorIndex idx;
    const HashingEmbedder e;
    for (const auto& r : records) idx.add(r.app_id, r.description, e);
    std::mt19937 rng(1);
    for (int q = 0; q < 50; ++q) {
        const auto v = e.embed(testing_support::random_words(rng, 5, 80));
        EXPECT_EQ(idx.query_vector(v, 10), idx.query_vector_serial(v, 10));
    }
}

TEST(Index, KernelsAgreeOnRawMatrix) {
    std::mt19937 rng(17);
    std::normal_distribution<float> gauss;
    const std::size_t dim = 16;
    std::vector<float> vectors(dim * 50);
    for (auto& x : vectors) x = gauss(rng);
    std::vector<std::uint32_t> begin = {0};
    while (begin.back() < 50) begin.push_back(std::min<std::uint32_t>(50, begin.back() + 1 + rng() % 4));
    kernels::ChunkMatrixView view{vectors, dim, begin};
    std::vector<float> q(dim);
    for (auto& x : q) x = gauss(rng);
    std::vector<kernels::AppScore> par(view.apps());
    std::vector<kernels::AppScore> ser(view.apps());
    kernels::best_chunk_per_app(view, q, par);
    kernels::best_chunk_per_app_serial(view, q, ser);
    for (std::size_t a = 0; a < view.apps(); ++a) {
        EXPECT_EQ(par[a].score, ser[a].score);
        EXPECT_EQ(par[a].best_chunk, ser[a].best_chunk);
    }
}

TEST(Index, KLargerThanAppsReturnsAll) {
    VectorIndex idx;
    const HashingEmbedder e;
    idx.add("a", words(300), e);
    EXPECT_EQ(idx.query("anything", 10, e).size(), 1u);
}

TEST(Index, EmptyIndexReturnsNothing) {
    const VectorIndex idx;
    const HashingEmbedder e;
    EXPECT_TRUE(idx.query("sleep", 3, e).empty());
}

TEST(Index, RejectsBadArguments) {
    VectorIndex idx;
    const HashingEmbedder e;
    EXPECT_THROW(idx.add("a", "", e), Error);
    EXPECT_THROW(idx.query("q", 0, e), Error);
    const HashingEmbedder wrong(16);
    EXPECT_THROW(idx.add("a", "text here", wrong), Error);
}

TEST(Index, RemoveDropsTheApp) {
    VectorIndex idx;
    const HashingEmbedder e;
    idx.add("a", words(4500), e);
    idx.add("b", words(300), e);
    EXPECT_TRUE(idx.remove("a"));
    EXPECT_FALSE(idx.remove("a"));
    EXPECT_EQ(idx.chunk_count(), 1u);
    EXPECT_EQ(idx.query("x", 5, e).size(), 1u);
}

TEST(Index, SerializeRoundTrip) {
    TempDir dir;
    const auto records = testing_support::fixture_corpus(30, 77);
    VectorIndex idx;
    const HashingEmbedder e;
    for (const auto& r : records) idx.add(r.app_id, r.description, e);
    idx.save(dir / "index.bin");
    const auto loaded = VectorIndex::load(dir / "index.bin");
    EXPECT_EQ(loaded.serialize(), idx.serialize());
    EXPECT_EQ(loaded.query("sleep music", 5, e), idx.query("sleep music", 5, e));
}

TEST(Index, RejectsCorruptFiles) {
    VectorIndex idx;
    const HashingEmbedder e;
    idx.add("a", words(300), e);
    auto bytes = idx.serialize();
    EXPECT_THROW(VectorIndex::deserialize(bytes.substr(0, bytes.size() - 3)), Error);
    EXPECT_THROW(VectorIndex::deserialize("garbage"), Error);
    bytes[8] = 9;  // major version
    EXPECT_THROW(VectorIndex::deserialize(bytes), Error);
}

// ---- query text

TEST(BuildQuery, FeatureOnly) {
    EXPECT_EQ(build_query({"Travel Planner", "Plan perfect trip from flights"}),
              "Travel Planner: Plan perfect trip from flights");
}

TEST(BuildQuery, WithSuperFeature) {
    EXPECT_EQ(build_query({"F", "df"}, Feature{"S", "ds"}), "F: df; S: ds");
}

TEST(BuildQuery, EmptyDescriptionAllowed) { EXPECT_EQ(build_query({"F", ""}), "F: "); }
