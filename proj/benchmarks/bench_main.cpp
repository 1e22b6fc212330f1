#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <agepde/operators.hpp>
#include <agepde/solver.hpp>

using namespace agepde;

namespace {

constexpr double pi = std::numbers::pi;

Grid make_grid(int dim, int nx, int steps) {
    std::vector<double> ext(dim, 1.0);
    std::vector<int> cells(dim, nx);
    return build_grid(0.25, 0.25, 0.25 / steps, ext, cells);
}

Field noise(const Grid& g) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g);
    for (double& v : f.values()) v = u(rng);
    return f;
}

void BM_apply_A(benchmark::State& state) {
    Grid g = make_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 8);
    Field f = noise(g);
    DiffusionSpec d = DiffusionSpec::sinusoidal(0.2);
    for (auto _ : state) {
        Field r = apply_A(f, d, BoundaryCondition::dirichlet());
        benchmark::DoNotOptimize(r.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.values().size()));
}
BENCHMARK(BM_apply_A)->Args({1, 64})->Args({1, 256})->Args({2, 32})->Args({2, 64});

void BM_solve_forward(benchmark::State& state) {
    Scenario s;
    s.grid = make_grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 16);
    s.model = {DiffusionSpec::identity(), SourceSpec::logistic(1.0, 1.0), std::nullopt};
    s.initial = [](double a, const Point& x) { return (1.0 + a) * std::sin(pi * x[0]); };
    s.boundary = [](double, const Point& x) { return std::sin(pi * x[0]); };
    for (auto _ : state) {
        auto [u, rep] = solve_forward(s);
        benchmark::DoNotOptimize(u.values().data());
    }
}
BENCHMARK(BM_solve_forward)->Args({1, 64})->Args({1, 256})->Args({2, 32})->Unit(benchmark::kMillisecond);

void BM_transport(benchmark::State& state) {
    Grid g = make_grid(1, static_cast<int>(state.range(0)), 32);
    Field f = noise(g);
    for (auto _ : state) {
        Field r = apply_transport(f);
        benchmark::DoNotOptimize(r.values().data());
    }
}
BENCHMARK(BM_transport)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
