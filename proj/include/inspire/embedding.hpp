#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace inspire::vectorindex {

inline constexpr std::size_t kDefaultDimension = 384;

// Fixed-dimension embedding. Components are finite; providers return them
// unit-normalized (or all zero for text with no content).
struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dimension() const { return values.size(); }
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
};

// Hashed bag-of-words projection: each token adds a signed unit to one
// hashed coordinate, and the result is L2-normalized. Deterministic across
// platforms; no model weights required.
class HashingEmbedder : public EmbeddingProvider {
public:
    explicit HashingEmbedder(std::size_t dimension = kDefaultDimension);

    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) const override;

private:
    std::size_t dimension_;
};

// Scales v to unit L2 norm in double precision; zero vectors stay zero.
void normalize(std::span<float> v);

// Dot product accumulated in double, left to right.
double dot(std::span<const float> a, std::span<const float> b);

// dot / (|a| |b|); 0 when either side is zero.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace inspire::vectorindex
