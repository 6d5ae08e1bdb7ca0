#include "doctest.h"

#include <cmath>
#include <random>

#include "resilience/engine.hpp"
#include "resilience/oracle.hpp"
#include "support.hpp"

using namespace resilience;
using resilience::testing::m1;
using resilience::testing::random_definition;
using resilience::testing::random_subset;
using resilience::testing::states;

namespace {

/// Game-tree reference: can the controller keep every robust successor in A
/// from (t, x) until K? Written without tables.
bool survives(const SystemModel& model, int t, Index x, const StateSet& a) {
    if (!a.contains(x)) return false;
    if (t == model.horizon()) return true;
    for (Index u : model.allowed_controls(t, x)) {
        bool ok = true;
        for (Index w : model.robust_subset(t)) ok = ok && survives(model, t + 1, model.transition(t, x, u, w), a);
        if (ok) return true;
    }
    return false;
}

/// Expectimax reference for the best viability probability.
double best_probability(const SystemModel& model, int t, Index x, const StateSet& a) {
    if (!a.contains(x)) return 0.0;
    if (t == model.horizon()) return 1.0;
    double best = 0.0;
    for (Index u : model.allowed_controls(t, x)) {
        double v = 0.0;
        for (Index w = 0; w < model.num_uncertainties(t); ++w)
            v += model.probability(t, w) * best_probability(model, t + 1, model.transition(t, x, u, w), a);
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

TEST_CASE("robust kernel of M1") {
    const auto model = m1();
    const auto kernel = robust_viability_kernel(model, states(4, {2, 3}));
    for (int t = 0; t <= 3; ++t) CHECK(kernel.members[t] == states(4, {2, 3}));
    CHECK(kernel.witness[0][2] == 1);
    CHECK(kernel.witness[0][3] == 0);

    CHECK(robust_viability_kernel(model, states(4, {3})).members[0] == states(4, {3}));
    const auto bottom = robust_viability_kernel(model, states(4, {0}));
    CHECK(bottom.members[0] == states(4, {0}));
    CHECK(bottom.witness[0][0] == 0);
}

TEST_CASE("robust kernel shrinks backwards in time and sits inside A") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const SystemModel model(random_definition(rng, {.robust_subsets = true}));
        const auto a = random_subset(rng, model.num_states());
        const auto kernel = robust_viability_kernel(model, a);
        for (int t = 0; t <= model.horizon(); ++t) {
            CHECK(kernel.members[t].is_subset_of(a));
            for (Index x = 0; x < model.num_states(); ++x)
                CHECK(kernel.members[t].contains(x) == survives(model, t, x, a));
        }
        const auto witness = kernel.witness_strategy(0);
        CHECK(is_admissible(model, witness));
        for (Index x : kernel.members[0].members()) CHECK(check_resilient(model, witness, x, 0, Viability{a}));
    }
}

TEST_CASE("stochastic value on M1") {
    const auto model = m1();
    const auto value = stochastic_viability_value(model, states(4, {2, 3}));
    CHECK(value.value[0][2] == 1.0);
    CHECK(value.value[0][3] == 1.0);
    CHECK(value.value[0][1] == 0.0);
    CHECK(value.resilient(0, 1.0) == states(4, {2, 3}));
}

TEST_CASE("stochastic value agrees with expectimax and the witness attains it") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const SystemModel model(random_definition(rng, {.probabilities = true}));
        const auto a = random_subset(rng, model.num_states());
        const auto value = stochastic_viability_value(model, a);
        const auto witness = value.witness_strategy(0);
        for (Index x = 0; x < model.num_states(); ++x) {
            CHECK(std::abs(value.value[0][x] - best_probability(model, 0, x, a)) <= 1e-12);
            const auto bundle = build_bundle(model, witness, x, 0, false);
            CHECK(std::abs(1.0 - evaluate_risk(model, Exceedance{a}, bundle) - value.value[0][x]) <= 1e-12);
            CHECK(value.value[0][x] >= 0.0);
            CHECK(value.value[0][x] <= 1.0);
        }
    }
}

TEST_CASE("recovery table of M1") {
    const auto a = states(4, {2, 3});
    const auto benign = m1({.robust = {0}});
    const auto table = robust_recovery_table(benign, a, 3);
    REQUIRE(table.r_star[0].has_value());
    CHECK(*table.r_star[0] == 2);
    CHECK(*table.r_star[1] == 1);
    CHECK(*table.r_star[2] == 0);
    CHECK(robust_recovery_table(benign, a, 1).r_star[0] == std::nullopt);

    const auto full = robust_recovery_table(m1(), a, 3);
    CHECK(full.r_star[0] == std::nullopt);
    CHECK(full.r_star[3] == 0);
    CHECK_THROWS_AS(robust_recovery_table(benign, a, 4), InputError);
}

TEST_CASE("recovery witnesses realize the offsets") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const SystemModel model(random_definition(rng, {.robust_subsets = true}));
        const auto a = random_subset(rng, model.num_states());
        const int K = model.horizon();
        const auto table = robust_recovery_table(model, a, K);
        const auto witness = table.witness_strategy(0);
        const auto kernel = robust_viability_kernel(model, a);
        for (Index x = 0; x < model.num_states(); ++x) {
            const auto expected = oracle::min_max_recovery_time(model, x, 0, a, StrategyClass::Markovian);
            CHECK(table.r_star[x] == expected);
            if (!table.r_star[x]) continue;
            CHECK(evaluate_risk(model, max_recovery_time_risk(a), build_bundle(model, witness, x, 0, true)) ==
                  static_cast<double>(*table.r_star[x]));
            CHECK((*table.r_star[x] == 0) == kernel.members[0].contains(x));
        }
    }
}

TEST_CASE("explicit robust scenario lists fall back to exhaustive search") {
    auto def = resilience::testing::m1_definition();
    def.robust_scenarios = {{0, 0, 0}, {0, 1, 0}};
    const SystemModel model(def);
    CHECK_THROWS_AS(robust_viability_kernel(model, states(4, {2, 3})), ConfigurationError);
    const RegimeSpec viable = Viability{states(4, {1, 2, 3})};
    CHECK_FALSE(has_dp_route(model, viable));
    const auto set = resilient_states(model, 0, viable, StrategyClass::Markovian);
    CHECK(set.certificate == Certificate::Exhaustive);
    CHECK(set.states == oracle::resilient_states(model, 0, viable, StrategyClass::Markovian));
    CHECK(set.states.contains(1));
}

TEST_CASE("resilient_states certifies every member with its witness") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 60; ++trial) {
        const SystemModel model(random_definition(rng, {.max_states = 3, .max_horizon = 2, .probabilities = true,
                                                        .robust_subsets = true}));
        const auto a = random_subset(rng, model.num_states());
        const int t = std::uniform_int_distribution<int>(0, model.horizon())(rng);
        const std::vector<RegimeSpec> regimes{
            Viability{a},
            RobustRecovery{a, model.horizon()},
            StochasticViability{a, 0.5},
            Bounded{a},
            AtMostKExits{a, 1},
            ProbExcursion{a, 0.25},
            ControlEvent{ControlSet::all(model.num_controls())},
        };
        for (const auto& regime : regimes) {
            for (auto cls : {StrategyClass::Markovian, StrategyClass::Adapted}) {
                const auto got = resilient_states(model, t, regime, cls);
                CHECK(got.states == oracle::resilient_states(model, t, regime, cls));
                for (Index x : got.states.members()) {
                    REQUIRE(got.witnesses[x].has_value());
                    CHECK(check_resilient(model, *got.witnesses[x], x, t, regime));
                }
            }
        }
    }
}

TEST_CASE("exhaustive search is independent of the thread count") {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 20; ++trial) {
        const SystemModel model(random_definition(rng, {.max_states = 4, .max_horizon = 2, .probabilities = true}));
        const RegimeSpec regime = AtMostKExits{random_subset(rng, model.num_states()), 1};
        const auto one = resilient_states(model, 0, regime, StrategyClass::Markovian, {.threads = 1});
        const auto four = resilient_states(model, 0, regime, StrategyClass::Markovian, {.threads = 4});
        CHECK(one.states == four.states);
        CHECK(one.witnesses == four.witnesses);
    }
}

TEST_CASE("capacity errors point at the dynamic-programming regimes") {
    const auto model = m1();
    try {
        (void)resilient_states(model, 0, Bounded{states(4, {1, 2, 3})}, StrategyClass::Adapted,
                               {.strategy_cap = 100});
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("dynamic programming") != std::string::npos);
        CHECK(e.cap() == 100);
    }
}
