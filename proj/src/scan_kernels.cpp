#include "inspire/scan_kernels.hpp"

#include <algorithm>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace inspire::vectorindex::kernels {

namespace {

// Shared by both kernels so that scores are bit-identical.
inline double row_dot(const float* row, const float* query, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += static_cast<double>(row[i]) * query[i];
    return acc;
}

inline AppScore score_app(const ChunkMatrixView& view, const float* query, std::size_t app) {
    const std::size_t dim = view.dimension;
    const std::uint32_t begin = view.app_begin[app];
    const std::uint32_t end = view.app_begin[app + 1];
    AppScore best{-2.0, 0};
    for (std::uint32_t c = begin; c < end; ++c) {
        const double s = row_dot(view.vectors.data() + static_cast<std::size_t>(c) * dim, query, dim);
        if (s > best.score) best = {s, c - begin};
    }
    return best;
}

}  // namespace

void best_chunk_per_app(const ChunkMatrixView& view, std::span<const float> query,
                        std::span<AppScore> out) {
    const auto apps = static_cast<std::int64_t>(view.apps());
    const float* q = query.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t a = 0; a < apps; ++a) {
        out[static_cast<std::size_t>(a)] = score_app(view, q, static_cast<std::size_t>(a));
    }
}

void best_chunk_per_app_serial(const ChunkMatrixView& view, std::span<const float> query,
                               std::span<AppScore> out) {
    for (std::size_t a = 0; a < view.apps(); ++a) out[a] = score_app(view, query.data(), a);
}

std::vector<std::size_t> top_k(std::span<const AppScore> scores, std::span<const std::string> app_ids,
                               std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
        return app_ids[a] < app_ids[b];
    };
    k = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
    order.resize(k);
    return order;
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace inspire::vectorindex::kernels
