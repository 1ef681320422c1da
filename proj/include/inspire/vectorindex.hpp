#pragma once

#include "inspire/embedding.hpp"
#include "inspire/feature.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace inspire::vectorindex {

struct IndexConfig {
    std::size_t chunk_max_chars = 2000;
    std::size_t dimension = kDefaultDimension;
    std::size_t k = 3;

    void validate() const;
};

struct Chunk {
    std::string app_id;
    std::size_t chunk_index = 0;
    std::string text;
};

// Splits text into chunks of at most chunk_max_chars characters. A chunk ends
// after the last whitespace inside the window; a window without whitespace is
// cut hard at the limit. Concatenating the chunks reproduces the text.
std::vector<Chunk> chunk_description(std::string_view text, const IndexConfig& config,
                                     std::string_view app_id = {});

struct QueryHit {
    std::string app_id;
    double score = 0.0;
    std::size_t best_chunk_index = 0;

    friend bool operator==(const QueryHit&, const QueryHit&) = default;
};

// Retrieval text: "name: description", plus "; super: description" when a
// super feature is given.
std::string build_query(const Feature& feature, const std::optional<Feature>& context = std::nullopt);

// Exact flat index over unit-normalized chunk embeddings. Apps are scored by
// their best chunk; queries take a shared lock, writes an exclusive one.
class VectorIndex {
public:
    explicit VectorIndex(IndexConfig config = {});
    VectorIndex(const VectorIndex& other);
    VectorIndex& operator=(const VectorIndex& other);

    const IndexConfig& config() const { return config_; }

    // Embeds every chunk before touching the index, so a provider failure
    // leaves the app's previous vectors (or none) in place.
    std::size_t add(const std::string& app_id, std::string_view description,
                    const EmbeddingProvider& provider);
    bool remove(const std::string& app_id);

    std::vector<QueryHit> query(std::string_view text, std::size_t k,
                                const EmbeddingProvider& provider) const;
    std::vector<QueryHit> query_vector(const EmbeddingVector& query, std::size_t k) const;
    // Same result through the serial reference kernel.
    std::vector<QueryHit> query_vector_serial(const EmbeddingVector& query, std::size_t k) const;

    std::size_t app_count() const;
    std::size_t chunk_count() const;
    std::size_t chunk_count(const std::string& app_id) const;
    bool contains(const std::string& app_id) const;
    std::vector<std::string> app_ids() const;

    // Binary sidecar, little-endian:
    //   "INSPIDX\0" u32 major u32 minor u32 dimension u32 chunk_max_chars
    //   u64 apps u64 chunks, then per app {u32 id_len, id bytes, u32 chunks},
    //   then chunks*dimension float32 values in app order.
    std::string serialize() const;
    static VectorIndex deserialize(std::string_view bytes);
    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

private:
    std::vector<QueryHit> run_query(const EmbeddingVector& query, std::size_t k, bool serial) const;
    void erase_locked(std::size_t slot);

    IndexConfig config_;
    mutable std::shared_mutex mutex_;
    std::vector<std::string> app_ids_;
    std::vector<std::uint32_t> app_begin_{0};
    std::vector<float> vectors_;
    std::unordered_map<std::string, std::size_t> slot_;
};

}  // namespace inspire::vectorindex
