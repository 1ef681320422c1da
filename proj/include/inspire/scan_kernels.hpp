#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Exhaustive cosine scan over a flat chunk matrix. Two implementations with
// identical per-chunk arithmetic: an OpenMP-parallel kernel for production
// and a serial reference kept for tests and benchmarks.
namespace inspire::vectorindex::kernels {

// Row-major chunk vectors of one index. Chunks of the same app are
// contiguous; app_begin has one entry per app plus a final sentinel.
struct ChunkMatrixView {
    std::span<const float> vectors;          // chunks * dimension
    std::size_t dimension = 0;
    std::span<const std::uint32_t> app_begin;  // apps + 1

    std::size_t apps() const { return app_begin.empty() ? 0 : app_begin.size() - 1; }
};

struct AppScore {
    double score = 0.0;
    std::uint32_t best_chunk = 0;  // index within the app
};

// Best chunk score per app; out.size() must equal view.apps().
void best_chunk_per_app(const ChunkMatrixView& view, std::span<const float> query,
                        std::span<AppScore> out);

void best_chunk_per_app_serial(const ChunkMatrixView& view, std::span<const float> query,
                               std::span<AppScore> out);

// Indices of the k best apps: score descending, then app id ascending.
std::vector<std::size_t> top_k(std::span<const AppScore> scores,
                               std::span<const std::string> app_ids, std::size_t k);

int max_threads();

}  // namespace inspire::vectorindex::kernels
