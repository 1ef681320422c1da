#include "inspire/vectorindex.hpp"
#include "inspire/error.hpp"
#include "inspire/fileio.hpp"
#include "inspire/scan_kernels.hpp"
#include "inspire/text.hpp"

#include <cmath>
#include <cstring>
#include <mutex>

namespace inspire::vectorindex {

namespace {

constexpr char kMagic[8] = {'I', 'N', 'S', 'P', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kMajor = 1;
constexpr std::uint32_t kMinor = 0;

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorCode::validation, "index file is truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

EmbeddingVector prepared(EmbeddingVector v, std::size_t dimension) {
    if (v.dimension() != dimension) {
        throw Error(ErrorCode::validation, "embedding has dimension " + std::to_string(v.dimension()) +
                                               ", index expects " + std::to_string(dimension));
    }
    double norm2 = 0.0;
    for (float x : v.values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::validation, "embedding has a non-finite component");
        norm2 += static_cast<double>(x) * x;
    }
    // Providers normally hand back unit vectors; leave those bit-exact.
    if (norm2 != 0.0 && std::fabs(norm2 - 1.0) > 1e-5) normalize(v.values);
    return v;
}

}  // namespace

void IndexConfig::validate() const {
    if (chunk_max_chars == 0 || dimension == 0 || k == 0) {
        throw Error(ErrorCode::validation, "index config values must be strictly positive");
    }
}

std::vector<Chunk> chunk_description(std::string_view text, const IndexConfig& config, std::string_view app_id) {
    const auto offsets = text::char_offsets(text);
    const std::size_t chars = offsets.size() - 1;
    const std::size_t limit = config.chunk_max_chars;
    std::vector<Chunk> chunks;
    std::size_t start = 0;
    while (start < chars) {
        std::size_t cut = chars;
        if (chars - start > limit) {
            cut = start + limit;
            for (std::size_t w = start + limit; w-- > start;) {
                if (text::is_space(text, offsets[w])) {
                    cut = w + 1;
                    break;
                }
            }
        }
        chunks.push_back({std::string(app_id), chunks.size(),
                          std::string(text.substr(offsets[start], offsets[cut] - offsets[start]))});
        start = cut;
    }
    return chunks;
}

std::string build_query(const Feature& feature, const std::optional<Feature>& context) {
    auto q = feature.name + ": " + feature.description;
    if (context) q += "; " + context->name + ": " + context->description;
    return q;
}

VectorIndex::VectorIndex(IndexConfig config) : config_(config) { config_.validate(); }

VectorIndex::VectorIndex(const VectorIndex& other) {
    std::shared_lock lock(other.mutex_);
    config_ = other.config_;
    app_ids_ = other.app_ids_;
    app_begin_ = other.app_begin_;
    vectors_ = other.vectors_;
    slot_ = other.slot_;
}

VectorIndex& VectorIndex::operator=(const VectorIndex& other) {
    if (this == &other) return *this;
    VectorIndex copy(other);
    std::unique_lock lock(mutex_);
    config_ = copy.config_;
    app_ids_ = std::move(copy.app_ids_);
    app_begin_ = std::move(copy.app_begin_);
    vectors_ = std::move(copy.vectors_);
    slot_ = std::move(copy.slot_);
    return *this;
}

std::size_t VectorIndex::add(const std::string& app_id, std::string_view description,
                             const EmbeddingProvider& provider) {
    if (description.empty()) throw Error(ErrorCode::validation, "cannot index an empty description for " + app_id);
    const auto chunks = chunk_description(description, config_, app_id);

    std::vector<float> block;
    block.reserve(chunks.size() * config_.dimension);
    for (const auto& chunk : chunks) {
        EmbeddingVector v;
        try {
            v = provider.embed(chunk.text);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::provider_failure, "embedding failed for " + app_id + ": " + e.what());
        }
        v = prepared(std::move(v), config_.dimension);
        block.insert(block.end(), v.values.begin(), v.values.end());
    }

    std::unique_lock lock(mutex_);
    if (const auto it = slot_.find(app_id); it != slot_.end()) erase_locked(it->second);
    slot_[app_id] = app_ids_.size();
    app_ids_.push_back(app_id);
    vectors_.insert(vectors_.end(), block.begin(), block.end());
    app_begin_.push_back(static_cast<std::uint32_t>(vectors_.size() / config_.dimension));
    return chunks.size();
}

bool VectorIndex::remove(const std::string& app_id) {
    std::unique_lock lock(mutex_);
    const auto it = slot_.find(app_id);
    if (it == slot_.end()) return false;
    erase_locked(it->second);
    return true;
}

void VectorIndex::erase_locked(std::size_t slot) {
    const auto begin = app_begin_[slot];
    const auto end = app_begin_[slot + 1];
    const auto removed = end - begin;
    const auto dim = static_cast<std::ptrdiff_t>(config_.dimension);
    vectors_.erase(vectors_.begin() + begin * dim, vectors_.begin() + end * dim);
    slot_.erase(app_ids_[slot]);
    app_ids_.erase(app_ids_.begin() + static_cast<std::ptrdiff_t>(slot));
    app_begin_.erase(app_begin_.begin() + static_cast<std::ptrdiff_t>(slot) + 1);
    for (std::size_t i = slot + 1; i < app_begin_.size(); ++i) app_begin_[i] -= removed;
    for (std::size_t i = slot; i < app_ids_.size(); ++i) slot_[app_ids_[i]] = i;
}

std::vector<QueryHit> VectorIndex::query(std::string_view text, std::size_t k,
                                         const EmbeddingProvider& provider) const {
    if (k < 1) throw Error(ErrorCode::validation, "k must be at least 1");
    EmbeddingVector q;
    try {
        q = provider.embed(text);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::provider_failure, std::string("query embedding failed: ") + e.what());
    }
    return query_vector(q, k);
}

std::vector<QueryHit> VectorIndex::query_vector(const EmbeddingVector& query, std::size_t k) const {
    return run_query(query, k, false);
}

std::vector<QueryHit> VectorIndex::query_vector_serial(const EmbeddingVector& query, std::size_t k) const {
    return run_query(query, k, true);
}

std::vector<QueryHit> VectorIndex::run_query(const EmbeddingVector& query, std::size_t k, bool serial) const {
    if (k < 1) throw Error(ErrorCode::validation, "k must be at least 1");
    const auto q = prepared(query, config_.dimension);
    std::shared_lock lock(mutex_);
    if (app_ids_.empty()) return {};
    const kernels::ChunkMatrixView view{vectors_, config_.dimension, app_begin_};
    std::vector<kernels::AppScore> scores(app_ids_.size());
    if (serial) kernels::best_chunk_per_app_serial(view, q.values, scores);
    else kernels::best_chunk_per_app(view, q.values, scores);

    std::vector<QueryHit> hits;
    for (const auto i : kernels::top_k(scores, app_ids_, k)) {
        hits.push_back({app_ids_[i], scores[i].score, scores[i].best_chunk});
    }
    return hits;
}

std::size_t VectorIndex::app_count() const {
    std::shared_lock lock(mutex_);
    return app_ids_.size();
}

std::size_t VectorIndex::chunk_count() const {
    std::shared_lock lock(mutex_);
    return app_begin_.back();
}

std::size_t VectorIndex::chunk_count(const std::string& app_id) const {
    std::shared_lock lock(mutex_);
    const auto it = slot_.find(app_id);
    if (it == slot_.end()) return 0;
    return app_begin_[it->second + 1] - app_begin_[it->second];
}

bool VectorIndex::contains(const std::string& app_id) const {
    std::shared_lock lock(mutex_);
    return slot_.count(app_id) > 0;
}

std::vector<std::string> VectorIndex::app_ids() const {
    std::shared_lock lock(mutex_);
    return app_ids_;
}

std::string VectorIndex::serialize() const {
    std::shared_lock lock(mutex_);
    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kMajor);
    put<std::uint32_t>(out, kMinor);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(config_.dimension));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(config_.chunk_max_chars));
    put<std::uint64_t>(out, app_ids_.size());
    put<std::uint64_t>(out, app_begin_.back());
    for (std::size_t i = 0; i < app_ids_.size(); ++i) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(app_ids_[i].size()));
        out += app_ids_[i];
        put<std::uint32_t>(out, app_begin_[i + 1] - app_begin_[i]);
    }
    out.append(reinterpret_cast<const char*>(vectors_.data()), vectors_.size() * sizeof(float));
    return out;
}

VectorIndex VectorIndex::deserialize(std::string_view bytes) {
    Reader r(bytes);
    if (r.take(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
        throw Error(ErrorCode::validation, "not an index file");
    }
    const auto major = r.get<std::uint32_t>();
    r.get<std::uint32_t>();
    if (major != kMajor) throw Error(ErrorCode::validation, "unsupported index format major " + std::to_string(major));
    IndexConfig config;
    config.dimension = r.get<std::uint32_t>();
    config.chunk_max_chars = r.get<std::uint32_t>();
    VectorIndex index(config);
    const auto apps = r.get<std::uint64_t>();
    const auto chunks = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < apps; ++i) {
        const auto len = r.get<std::uint32_t>();
        std::string id(r.take(len));
        const auto n = r.get<std::uint32_t>();
        index.slot_[id] = index.app_ids_.size();
        index.app_ids_.push_back(std::move(id));
        index.app_begin_.push_back(index.app_begin_.back() + n);
    }
    if (index.app_begin_.back() != chunks) throw Error(ErrorCode::validation, "index chunk count mismatch");
    const auto raw = r.take(chunks * config.dimension * sizeof(float));
    index.vectors_.resize(chunks * config.dimension);
    std::memcpy(index.vectors_.data(), raw.data(), raw.size());
    if (!r.done()) throw Error(ErrorCode::validation, "trailing bytes in index file");
    return index;
}

void VectorIndex::save(const std::filesystem::path& path) const { io::write_atomic(path, serialize()); }

VectorIndex VectorIndex::load(const std::filesystem::path& path) { return deserialize(io::read_file(path)); }

}  // namespace inspire::vectorindex
