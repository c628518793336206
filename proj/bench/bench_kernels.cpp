// Copyright 2026 The harqeh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts.

#include "harqeh/montecarlo.hpp"
#include "harqeh/policies.hpp"
#include "harqeh/solver.hpp"
#include "harqeh/verify.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace harqeh;

void BM_EstimateSerial(benchmark::State& state) {
    const LinkConfig cfg = configs::table1(1);
    const PolicyPtr p = bf_policy(cfg);
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_serial(*p, cfg, n, 1).mean);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateSerial)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_EstimateParallel(benchmark::State& state) {
    const LinkConfig cfg = configs::table1(1);
    const PolicyPtr p = bf_policy(cfg);
    EstimateOptions opts;
    opts.lanes = static_cast<int>(state.range(1));
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate(*p, cfg, n, 1, opts).mean);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateParallel)->Args({100'000, 1})->Args({100'000, 2})->Args({100'000, 8})->Unit(
    benchmark::kMillisecond);

LinkConfig large_config() { return LinkConfig{0.3, 40.0, 0.25, 3, 40, 400}.validated(); }

void BM_SolveGaussSeidel(benchmark::State& state) {
    const LinkConfig cfg = large_config();
    for (auto _ : state) benchmark::DoNotOptimize(value_iteration_ssp(cfg).k.data());
}
BENCHMARK(BM_SolveGaussSeidel)->Unit(benchmark::kMillisecond);

void BM_SolveJacobi(benchmark::State& state) {
    const LinkConfig cfg = large_config();
    for (auto _ : state) benchmark::DoNotOptimize(value_iteration_ssp_jacobi(cfg).k.data());
}
BENCHMARK(BM_SolveJacobi)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
