// Serial reference vs OpenMP kernels on a 5794 x 200 workload with 5 members.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "overlap_lab/kernels.hpp"

using namespace overlap_lab;
using namespace overlap_lab::kernels;

namespace {

constexpr std::size_t kRows = 5794;
constexpr std::size_t kClasses = 200;
constexpr std::size_t kMembers = 5;

struct Workload {
    std::vector<std::vector<float>> scores;
    std::vector<std::size_t> rows;
    std::vector<RowSelection> members;

    Workload() {
        std::mt19937_64 rng(1);
        std::normal_distribution<float> dist(0.0f, 3.0f);
        rows.resize(kRows);
        std::iota(rows.begin(), rows.end(), 0);
        for (std::size_t m = 0; m < kMembers; ++m) {
            auto& s = scores.emplace_back(kRows * kClasses);
            for (auto& v : s) v = dist(rng);
        }
        for (const auto& s : scores) members.push_back({s, kClasses, rows});
    }
};

const Workload& workload() {
    static const Workload w;
    return w;
}

template <auto Fn>
void bench_argmax(benchmark::State& state) {
    const auto& w = workload();
    std::vector<ClassIndex> out(kRows);
    for (auto _ : state) {
        Fn(w.members[0], out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kRows));
}

template <auto Fn>
void bench_softmax(benchmark::State& state) {
    const auto& w = workload();
    std::vector<double> out(kRows * kClasses);
    for (auto _ : state) {
        Fn(w.scores[0], kClasses, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kRows));
}

template <auto Fn>
void bench_ensemble(benchmark::State& state) {
    const auto& w = workload();
    std::vector<ClassIndex> out(kRows);
    for (auto _ : state) {
        Fn(w.members, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kRows));
}

}  // namespace

BENCHMARK(bench_argmax<serial::argmax_rows>)->Name("argmax/serial");
BENCHMARK(bench_argmax<parallel::argmax_rows>)->Name("argmax/parallel");
BENCHMARK(bench_softmax<serial::softmax_rows>)->Name("softmax/serial");
BENCHMARK(bench_softmax<parallel::softmax_rows>)->Name("softmax/parallel");
BENCHMARK(bench_ensemble<serial::vote>)->Name("vote/serial");
BENCHMARK(bench_ensemble<parallel::vote>)->Name("vote/parallel");
BENCHMARK(bench_ensemble<serial::cp_avg>)->Name("cp_avg/serial");
BENCHMARK(bench_ensemble<parallel::cp_avg>)->Name("cp_avg/parallel");

BENCHMARK_MAIN();
