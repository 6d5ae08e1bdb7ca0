#include <benchmark/benchmark.h>

#include <random>

#include "resilience/engine.hpp"
#include "resilience/optimize.hpp"
#include "resilience/oracle.hpp"

using namespace resilience;

namespace {

// Random walk on a ring of n states with a drift control and a two-point
// shock; states far from the origin are unacceptable.
SystemModel ring(int n, int horizon, int shocks = 2) {
    ModelDefinition def;
    def.horizon = horizon;
    for (int x = 0; x < n; ++x) def.states.push_back({"s" + std::to_string(x), {static_cast<double>(x)}});
    for (int u = 0; u < 3; ++u) def.controls.push_back({"u" + std::to_string(u), {static_cast<double>(u - 1)}});
    std::vector<std::string> labels;
    std::vector<double> probs;
    for (int w = 0; w < shocks; ++w) {
        labels.push_back("w" + std::to_string(w));
        probs.push_back(1.0 / shocks);
    }
    def.uncertainty.assign(horizon, labels);
    def.probabilities.assign(horizon, probs);
    def.allocate();
    for (int t = 0; t < horizon; ++t)
        for (int x = 0; x < n; ++x)
            for (int u = 0; u < 3; ++u)
                for (int w = 0; w < shocks; ++w)
                    def.set_next(t, static_cast<Index>(x), static_cast<Index>(u), static_cast<Index>(w),
                                 static_cast<Index>(((x + u - 1 + w - shocks / 2) % n + n) % n));
    return SystemModel(def);
}

StateSet near_origin(int n) {
    StateSet a(static_cast<std::size_t>(n));
    for (int x = 0; x < n; ++x)
        if (x <= n / 4 || x >= n - n / 4) a.insert(static_cast<Index>(x));
    return a;
}

void BM_RobustKernel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = ring(n, 50);
    const auto a = near_origin(n);
    for (auto _ : state) benchmark::DoNotOptimize(robust_viability_kernel(model, a));
    state.SetComplexityN(n);
}
BENCHMARK(BM_RobustKernel)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

void BM_StochasticValue(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = ring(n, 50, 3);
    const auto a = near_origin(n);
    for (auto _ : state) benchmark::DoNotOptimize(stochastic_viability_value(model, a));
    state.SetComplexityN(n);
}
BENCHMARK(BM_StochasticValue)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

void BM_RecoveryTable(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = ring(n, 50);
    const auto a = near_origin(n);
    for (auto _ : state) benchmark::DoNotOptimize(robust_recovery_table(model, a, 50));
}
BENCHMARK(BM_RecoveryTable)->RangeMultiplier(4)->Range(16, 4096);

void BM_OracleResilientStates(benchmark::State& state) {
    const auto model = ring(4, static_cast<int>(state.range(0)));
    const auto a = near_origin(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(oracle::resilient_states(model, 0, Viability{a}, StrategyClass::Markovian));
}
BENCHMARK(BM_OracleResilientStates)->DenseRange(1, 3);

void BM_OptimizeExhaustive(benchmark::State& state) {
    const auto model = ring(4, 2);
    const auto a = near_origin(4);
    const RiskMeasureSpec risk = ExitCountFunctional{a, {OuterFunctional::Kind::CVaR, 0.25}};
    OptimizeOptions options;
    options.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            minimize_risk(model, 0, 0, Bounded{StateSet::all(4)}, risk, StrategyClass::Markovian, options));
}
BENCHMARK(BM_OptimizeExhaustive)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_OptimizeDynamicProgramming(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto model = ring(n, 50);
    const auto a = near_origin(n);
    const RiskMeasureSpec effort = ComposedRisk{CostFunction{ControlEffortCost{}}, {OuterFunctional::Kind::Expectation}};
    for (auto _ : state)
        benchmark::DoNotOptimize(minimize_risk(model, 0, 0, Viability{a}, effort, StrategyClass::Markovian));
}
BENCHMARK(BM_OptimizeDynamicProgramming)->RangeMultiplier(4)->Range(16, 1024);

}  // namespace

BENCHMARK_MAIN();
