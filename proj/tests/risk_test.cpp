#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "resilience/regimes.hpp"
#include "resilience/risk.hpp"
#include "support.hpp"

using namespace resilience;
using resilience::testing::m1;
using resilience::testing::states;

namespace {

/// min over eta of eta + E[(Z - eta)^+] / level; the minimum is attained at an atom.
double cvar_by_minimization(const std::vector<WeightedValue>& values, double level) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& candidate : values) {
        const double eta = candidate.value;
        double tail = 0.0;
        for (const auto& v : values) tail += v.probability * std::max(0.0, v.value - eta);
        best = std::min(best, eta + tail / level);
    }
    return best;
}

}  // namespace

TEST_CASE("CVaR of four equally likely outcomes") {
    const std::vector<WeightedValue> z{{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}};
    CHECK(cvar(z, 0.5) == doctest::Approx(2.5));
    CHECK(cvar_by_minimization(z, 0.5) == doctest::Approx(2.5));
    CHECK(cvar(z, 1.0) == doctest::Approx(1.5));
    CHECK(cvar(z, 0.25) == doctest::Approx(3.0));
    CHECK(cvar(z, 0.125) == doctest::Approx(3.0));
}

TEST_CASE("CVaR splits a partially included atom") {
    const std::vector<WeightedValue> z{{10, 0.1}, {0, 0.9}};
    CHECK(cvar(z, 0.2) == doctest::Approx(5.0));
}

TEST_CASE("CVaR agrees with its minimization formula on random distributions") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = std::uniform_int_distribution<int>(1, 6)(rng);
        std::vector<WeightedValue> z(n);
        double total = 0.0;
        for (auto& v : z) {
            v.value = std::floor(unit(rng) * 10.0);
            v.probability = unit(rng) + 0.01;
            total += v.probability;
        }
        for (auto& v : z) v.probability /= total;
        for (double level : {0.05, 0.1, 0.3, 0.5, 0.75, 1.0}) {
            const double got = cvar(z, level);
            CHECK(got == doctest::Approx(cvar_by_minimization(z, level)).epsilon(1e-9));
            double mean = 0.0, worst = -1.0;
            for (const auto& v : z) {
                mean += v.value * v.probability;
                worst = std::max(worst, v.value);
            }
            CHECK(got >= mean - 1e-9);
            CHECK(got <= worst + 1e-9);
        }
    }
}

TEST_CASE("CVaR rejects bad input") {
    const std::vector<WeightedValue> z{{1, 0.5}, {2, 0.5}};
    CHECK_THROWS_AS(cvar(z, 0.0), InputError);
    CHECK_THROWS_AS(cvar(z, 1.5), InputError);
    const std::vector<WeightedValue> bad{{1, 0.5}, {2, 0.6}};
    CHECK_THROWS_AS(cvar(bad, 0.5), InputError);
}

TEST_CASE("exceedance of the idle strategy from 2 in M1") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    const auto bundle = build_bundle(model, Strategy::constant(model, 0), 2, 0, false);
    CHECK(evaluate_risk(model, Exceedance{a}, bundle) == doctest::Approx(0.875));

    // Scenario-by-scenario reference.
    double p = 0.0;
    for (const auto& scenario : enumerate_scenarios(model, false)) {
        Index x = 2;
        bool out = false;
        for (int s = 0; s < 3; ++s) {
            x = static_cast<Index>(std::max(0, static_cast<int>(x) - static_cast<int>(scenario[s])));
            out = out || x < 2;
        }
        if (out) p += 0.125;
    }
    CHECK(p == 0.875);
}

TEST_CASE("worst-case violation is an indicator over the robust set") {
    const auto benign = m1({.robust = {0}});
    const auto a = states(4, {2, 3});
    const auto idle = Strategy::constant(benign, 0);
    CHECK(evaluate_risk(benign, WorstCaseViolation{a}, build_bundle(benign, idle, 2, 0, true)) == 0.0);
    const auto full = m1();
    CHECK(evaluate_risk(full, WorstCaseViolation{a}, build_bundle(full, idle, 2, 0, true)) == 1.0);
    CHECK(evaluate_risk(full, WorstCaseViolation{a}, build_bundle(full, idle, 1, 0, true)) == 1.0);
}

TEST_CASE("ambiguity exceedance takes the worst member") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    const auto bundle = build_bundle(model, Strategy::constant(model, 0), 2, 0, false);
    const ProbabilityAssignment calm(3, {1.0, 0.0});
    const ProbabilityAssignment rough(3, {0.5, 0.5});
    CHECK(evaluate_risk(model, AmbiguityExceedance{a, {calm}}, bundle) == 0.0);
    CHECK(evaluate_risk(model, AmbiguityExceedance{a, {calm, rough}}, bundle) == doctest::Approx(0.875));
    CHECK_THROWS_AS(evaluate_risk(model, AmbiguityExceedance{a, {ProbabilityAssignment(3, {0.5, 0.6})}}, bundle),
                    InputError);
}

TEST_CASE("exit count functionals") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    const auto bundle = build_bundle(model, Strategy::constant(model, 0), 2, 0, false);
    // Exits from 2 under u = 0: the first w = 1 at time r gives K - r exits.
    // E = (3 * 4 + 2 * 2 + 1 * 1) / 8
    CHECK(evaluate_risk(model, ExitCountFunctional{a, {OuterFunctional::Kind::Expectation}}, bundle) ==
          doctest::Approx(17.0 / 8.0));
    CHECK(evaluate_risk(model, ExitCountFunctional{a, {OuterFunctional::Kind::WorstCase}}, bundle) == 3.0);
    CHECK(evaluate_risk(model, ExitCountFunctional{a, {OuterFunctional::Kind::CVaR, 0.5}}, bundle) ==
          doctest::Approx(3.0));
}

TEST_CASE("costs along a trajectory") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    const auto traj = simulate_closed_loop(model, Strategy::constant(model, 1), 0, {0, 1, 0});  // 0,1,1,2
    CHECK(evaluate_cost(model, CostFunction{TimeOutsideCost{a}}, traj) == 3.0);
    CHECK(evaluate_cost(model, CostFunction{ControlEffortCost{}}, traj) == 3.0);
    CHECK(evaluate_cost(model, CostFunction{ControlEffortCost{{0.5, 2.0}}}, traj) == 6.0);
    CHECK(evaluate_cost(model, CostFunction{TerminalCost{a}}, traj) == 0.0);
    CHECK(evaluate_cost(model, CostFunction{RecoveryTimeCost{a}}, traj) == 3.0);

    TabularCost table;
    table.state_cost.assign(4, {0.0, 1.0, 10.0, 100.0});
    table.control_cost.assign(3, {0.0, 0.25});
    CHECK(evaluate_cost(model, CostFunction{table}, traj) == doctest::Approx(0 + 1 + 1 + 10 + 0.75));

    const auto late = simulate_closed_loop(model, Strategy::constant(model, 1), 0, {1, 1, 1}, 1);  // 0,0,0
    CHECK(std::isinf(evaluate_cost(model, CostFunction{RecoveryTimeCost{a}}, late)));
}

TEST_CASE("the cemetery pays the penalty once per step") {
    auto def = resilience::testing::m1_definition();
    const std::vector<Index> only_zero{0};
    def.set_allowed(1, 1, only_zero);
    const SystemModel model(def);
    const auto traj = simulate_closed_loop(model, Strategy::constant(model, 1), 0, {0, 0, 0});  // 0,1,∂,∂
    CostFunction effort{ControlEffortCost{}, 100.0};
    CHECK(evaluate_cost(model, effort, traj) == 1 + 1 + 100 + 100);
    CostFunction outside{TimeOutsideCost{states(4, {2, 3})}, 100.0};
    CHECK(evaluate_cost(model, outside, traj) == 1 + 1 + 100 + 100);
}

TEST_CASE("composed risks and the recovery-time risk") {
    const auto benign = m1({.robust = {0}});
    const auto a = states(4, {2, 3});
    const auto bundle = build_bundle(benign, Strategy::constant(benign, 1), 0, 0, true);
    CHECK(evaluate_risk(benign, max_recovery_time_risk(a), bundle) == 2.0);
    const RiskMeasureSpec worst_effort = ComposedRisk{CostFunction{ControlEffortCost{}}, {OuterFunctional::Kind::WorstCase}};
    CHECK(evaluate_risk(benign, worst_effort, bundle) == 3.0);
}

TEST_CASE("probabilistic risks need probabilities") {
    const auto bare = m1({.with_probabilities = false});
    const auto a = states(4, {2});
    CHECK_THROWS_AS(validate(bare, RiskMeasureSpec{Exceedance{a}}), ConfigurationError);
    CHECK_THROWS_AS(validate(bare, RiskMeasureSpec{ComposedRisk{CostFunction{TerminalCost{a}}, {}}}),
                    ConfigurationError);
    CHECK_NOTHROW(validate(bare, max_recovery_time_risk(a)));
    CHECK_NOTHROW(validate(bare, RiskMeasureSpec{WorstCaseViolation{a}}));
}
