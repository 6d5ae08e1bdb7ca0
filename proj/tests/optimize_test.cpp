#include "doctest.h"

#include <cmath>
#include <random>

#include "resilience/optimize.hpp"
#include "resilience/oracle.hpp"
#include "support.hpp"

using namespace resilience;
using resilience::testing::m1;
using resilience::testing::random_definition;
using resilience::testing::random_subset;
using resilience::testing::states;

namespace {

RiskMeasureSpec expected_effort() {
    return ComposedRisk{CostFunction{ControlEffortCost{}}, {OuterFunctional::Kind::Expectation}};
}

}  // namespace

TEST_CASE("least expected effort that keeps M1 in {2,3}") {
    const auto model = m1();
    const RegimeSpec viable = Viability{states(4, {2, 3})};
    for (bool allow_dp : {true, false}) {
        OptimizeOptions options;
        options.allow_dp = allow_dp;
        const auto result = minimize_risk(model, 2, 0, viable, expected_effort(), StrategyClass::Markovian, options);
        CAPTURE(allow_dp);
        CHECK(result.resilient);
        CHECK(result.value == doctest::Approx(2.0));
        CHECK(result.certificate == (allow_dp ? Certificate::DynamicProgramming : Certificate::Exhaustive));
        REQUIRE(result.strategy.has_value());
        for (int t = 0; t < 3; ++t) {
            CHECK(result.strategy->policy(t).control(2, 0) == 1);
            CHECK(result.strategy->policy(t).control(3, 0) == 0);
        }
    }
}

TEST_CASE("non-resilient initial states have infinite indicator") {
    const auto model = m1();
    const RegimeSpec viable = Viability{states(4, {2, 3})};
    const auto result = minimize_risk(model, 1, 0, viable, expected_effort(), StrategyClass::Markovian);
    CHECK_FALSE(result.resilient);
    CHECK(std::isinf(result.value));
    CHECK_FALSE(result.strategy.has_value());
    CHECK(std::isinf(resilience_indicator(model, 0, viable, expected_effort())));
}

TEST_CASE("min-max recovery indicator of M1") {
    const auto a = states(4, {2, 3});
    const auto benign = m1({.robust = {0}});
    const RegimeSpec anything = Bounded{StateSet::all(4)};
    CHECK(resilience_indicator(benign, 0, anything, max_recovery_time_risk(a)) == 2.0);
    CHECK(std::isinf(resilience_indicator(m1(), 0, anything, max_recovery_time_risk(a))));
}

TEST_CASE("CVaR objective prefers the lighter tail") {
    const auto model = m1();
    const RegimeSpec anything = Bounded{StateSet::all(4)};
    const RiskMeasureSpec tail = ExitCountFunctional{states(4, {2, 3}), {OuterFunctional::Kind::CVaR, 0.5}};
    const auto result = minimize_risk(model, 2, 0, anything, tail, StrategyClass::Markovian);
    CHECK(result.value == doctest::Approx(0.0));
    CHECK(result.value == oracle::min_risk(model, 2, 0, anything, tail, StrategyClass::Markovian));
}

TEST_CASE("optimizer matches the oracle on random instances") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const SystemModel model(random_definition(rng, {.max_states = 3, .max_horizon = 2, .probabilities = true,
                                                        .robust_subsets = trial % 2 == 0}));
        const auto a = random_subset(rng, model.num_states());
        const Index x0 = static_cast<Index>(std::uniform_int_distribution<int>(0, int(model.num_states()) - 1)(rng));
        const std::vector<RegimeSpec> regimes{Viability{a}, StochasticViability{a, 1.0}, AtMostKExits{a, 1},
                                              Bounded{StateSet::all(model.num_states())}};
        const std::vector<RiskMeasureSpec> risks{
            expected_effort(),
            Exceedance{a},
            ComposedRisk{CostFunction{TimeOutsideCost{a}, 10.0}, {OuterFunctional::Kind::Expectation}},
            ComposedRisk{CostFunction{TimeOutsideCost{a}, 10.0}, {OuterFunctional::Kind::CVaR, 0.3}},
            ExitCountFunctional{a, {OuterFunctional::Kind::WorstCase}},
        };
        for (const auto& regime : regimes)
            for (const auto& risk : risks)
                for (auto cls : {StrategyClass::Markovian, StrategyClass::Adapted}) {
                    const auto got = minimize_risk(model, x0, 0, regime, risk, cls);
                    const double expected = oracle::min_risk(model, x0, 0, regime, risk, cls);
                    if (std::isinf(expected)) {
                        CHECK_FALSE(got.resilient);
                        continue;
                    }
                    REQUIRE(got.resilient);
                    CHECK(std::abs(got.value - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
                    CHECK(check_resilient(model, *got.strategy, x0, 0, regime));
                }
    }
}

TEST_CASE("optimizer results do not depend on the thread count") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemModel model(random_definition(rng, {.max_states = 4, .max_horizon = 2, .probabilities = true}));
        const auto a = random_subset(rng, model.num_states());
        const RegimeSpec regime = AtMostKExits{a, 1};
        const RiskMeasureSpec risk = Exceedance{a};
        OptimizeOptions serial, parallel;
        parallel.threads = 4;
        const auto one = minimize_risk(model, 0, 0, regime, risk, StrategyClass::Markovian, serial);
        const auto four = minimize_risk(model, 0, 0, regime, risk, StrategyClass::Markovian, parallel);
        CHECK(one.value == four.value);
        CHECK(one.strategy == four.strategy);
        CHECK(one.examined == four.examined);
    }
}

TEST_CASE("fast-path eligibility") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    CHECK(has_dp_route(model, Viability{a}, expected_effort(), StrategyClass::Markovian));
    CHECK_FALSE(has_dp_route(model, Viability{a}, expected_effort(), StrategyClass::Adapted));
    CHECK_FALSE(has_dp_route(model, Viability{a}, Exceedance{a}, StrategyClass::Markovian));
    CHECK_FALSE(has_dp_route(m1({.robust = {0}}), Viability{a}, expected_effort(), StrategyClass::Markovian));
    CHECK(has_dp_route(model, StochasticViability{a, 1.0}, expected_effort(), StrategyClass::Markovian));
    CHECK_FALSE(has_dp_route(model, StochasticViability{a, 0.9}, expected_effort(), StrategyClass::Markovian));
}
