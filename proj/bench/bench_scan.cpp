#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "inspire/scan_kernels.hpp"

namespace {

using namespace inspire::vectorindex::kernels;

struct Matrix {
    std::vector<float> vectors;
    std::vector<std::uint32_t> app_begin;
    std::vector<float> query;
    std::size_t dim = 0;

    ChunkMatrixView view() const { return {vectors, dim, app_begin}; }
};

void normalize(float* v, std::size_t dim) {
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += double(v[i]) * v[i];
    float inv = s > 0 ? float(1.0 / std::sqrt(s)) : 0.0f;
    for (std::size_t i = 0; i < dim; ++i) v[i] *= inv;
}

Matrix make_matrix(std::size_t apps, std::size_t dim) {
    std::mt19937 rng(42);
    std::normal_distribution<float> g;
    std::uniform_int_distribution<int> chunks(1, 4);
    Matrix m;
    m.dim = dim;
    m.app_begin.push_back(0);
    for (std::size_t a = 0; a < apps; ++a) {
        int c = chunks(rng);
        for (int j = 0; j < c; ++j) {
            std::size_t off = m.vectors.size();
            m.vectors.resize(off + dim);
            for (std::size_t i = 0; i < dim; ++i) m.vectors[off + i] = g(rng);
            normalize(&m.vectors[off], dim);
        }
        m.app_begin.push_back(std::uint32_t(m.vectors.size() / dim));
    }
    m.query.resize(dim);
    for (auto& x : m.query) x = g(rng);
    normalize(m.query.data(), dim);
    return m;
}

template <bool Parallel>
void BM_Scan(benchmark::State& state) {
    Matrix m = make_matrix(std::size_t(state.range(0)), 384);
    std::vector<AppScore> out(m.app_begin.size() - 1);
    for (auto _ : state) {
        if constexpr (Parallel)
            best_chunk_per_app(m.view(), m.query, out);
        else
            best_chunk_per_app_serial(m.view(), m.query, out);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * std::int64_t(m.vectors.size() / m.dim));
    state.counters["threads"] = Parallel ? max_threads() : 1;
}

}  // namespace

BENCHMARK(BM_Scan<false>)->Name("scan/serial")->Arg(1000)->Arg(10000)->Arg(50000);
BENCHMARK(BM_Scan<true>)->Name("scan/openmp")->Arg(1000)->Arg(10000)->Arg(50000);

BENCHMARK_MAIN();
