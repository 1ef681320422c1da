#include "inspire/embedding.hpp"
#include "inspire/error.hpp"
#include "inspire/text.hpp"

#include <cmath>

namespace inspire::vectorindex {

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorCode::validation, "embedding dimension must be positive");
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
    EmbeddingVector v;
    v.values.assign(dimension_, 0.0f);
    for (const auto& token : text::tokenize(text)) {
        const auto h = text::fnv1a(token);
        const auto slot = static_cast<std::size_t>(h % dimension_);
        v.values[slot] += (h >> 63) ? -1.0f : 1.0f;
    }
    normalize(v.values);
    return v;
}

void normalize(std::span<float> v) {
    double norm2 = 0.0;
    for (float x : v) norm2 += static_cast<double>(x) * x;
    if (norm2 == 0.0) return;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x = static_cast<float>(x * inv);
}

double dot(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
    return acc;
}

double cosine(std::span<const float> a, std::span<const float> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace inspire::vectorindex
