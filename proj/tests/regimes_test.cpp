#include "doctest.h"

#include "resilience/regimes.hpp"
#include "support.hpp"

using namespace resilience;
using resilience::testing::m1;
using resilience::testing::states;

namespace {

Trajectory path(std::vector<Index> xs, std::vector<Index> us, int start = 0) {
    Trajectory traj;
    traj.start = start;
    traj.states = std::move(xs);
    traj.controls = std::move(us);
    traj.scenario.assign(static_cast<std::size_t>(start) + traj.controls.size(), 0);
    return traj;
}

}  // namespace

TEST_CASE("exit times list states outside the set") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    const auto traj = path({1, 2, 1, 3}, {1, 0, 1});
    CHECK(exit_times(model, traj, a, false) == std::vector<int>{0, 2});
    CHECK(exit_times(model, path({2, 2, 4, 4}, {0, 0, 0}), a, false) == std::vector<int>{2, 3});
}

TEST_CASE("recovery time is the start of the final viable stretch") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    CHECK(recovery_time(model, path({0, 1, 2, 3}, {1, 1, 1}), a) == 2);
    CHECK(recovery_time(model, path({2, 1, 2, 3}, {1, 1, 1}), a) == 2);
    CHECK(recovery_time(model, path({2, 2, 2, 3}, {1, 1, 1}), a) == 0);
    CHECK_FALSE(recovery_time(model, path({2, 2, 2, 1}, {1, 1, 1}), a).has_value());
    CHECK(recovery_time(model, path({0, 3}, {1}, 2), a) == 3);
}

TEST_CASE("recovery time respects the constraint sets") {
    auto def = resilience::testing::m1_definition();
    const std::vector<Index> only_zero{0};
    def.set_allowed(2, 2, only_zero);
    const SystemModel model(def);
    const auto a = states(4, {2, 3});
    CHECK(recovery_time(model, path({2, 2, 2, 3}, {1, 1, 1}), a) == 3);
}

TEST_CASE("viability on M1 under the full scenario set") {
    const auto model = m1();
    const RegimeSpec viable = Viability{states(4, {2, 3})};
    const auto policy = Strategy::markovian(model, {{0, 0, 1, 0}, {0, 0, 1, 0}, {0, 0, 1, 0}});
    CHECK(regime_membership(model, viable, build_bundle(model, policy, 2, 0, true)));
    CHECK(regime_membership(model, viable, build_bundle(model, policy, 3, 0, true)));
    CHECK_FALSE(regime_membership(model, viable, build_bundle(model, policy, 1, 0, true)));
    const auto idle = Strategy::constant(model, 0);
    CHECK_FALSE(regime_membership(model, viable, build_bundle(model, idle, 2, 0, true)));
}

TEST_CASE("stochastic viability compares the exceedance with 1 - beta") {
    const auto model = m1();
    const auto a = states(4, {2, 3});
    const auto idle = Strategy::constant(model, 0);
    const auto bundle = build_bundle(model, idle, 2, 0, false);
    // Staying at 2 under u = 0 needs w = 0 three times.
    CHECK(regime_membership(model, StochasticViability{a, 0.125}, bundle));
    CHECK_FALSE(regime_membership(model, StochasticViability{a, 0.126}, bundle));
    CHECK(regime_membership(model, StochasticViability{a, 0.0}, bundle));
}

TEST_CASE("robust recovery uses absolute deadlines") {
    const auto benign = m1({.robust = {0}});
    const auto a = states(4, {2, 3});
    const auto up = Strategy::constant(benign, 1);
    const auto bundle = build_bundle(benign, up, 0, 0, true);
    CHECK(regime_membership(benign, RobustRecovery{a, 2}, bundle));
    CHECK_FALSE(regime_membership(benign, RobustRecovery{a, 1}, bundle));
    const auto full = m1();
    CHECK_FALSE(regime_membership(full, RobustRecovery{a, 3}, build_bundle(full, up, 0, 0, true)));
}

TEST_CASE("excursion regimes count exits") {
    const auto model = m1();
    const auto b = states(4, {2, 3});
    const auto idle = Strategy::constant(model, 0);
    const auto bundle = build_bundle(model, idle, 2, 0, false);
    CHECK(regime_membership(model, ProbExcursion{b, 0.875}, bundle));
    CHECK_FALSE(regime_membership(model, ProbExcursion{b, 0.87}, bundle));
    // Worst scenario (1,1,1) visits 1, 0, 0.
    CHECK(regime_membership(model, AtMostKExits{b, 3}, bundle));
    CHECK_FALSE(regime_membership(model, AtMostKExits{b, 2}, bundle));
    CHECK(regime_membership(model, Bounded{states(4, {0, 1, 2, 3})}, bundle));
    CHECK_FALSE(regime_membership(model, Bounded{b}, bundle));
}

TEST_CASE("at-most-k-exits ignores impossible scenarios") {
    auto def = resilience::testing::m1_definition();
    def.probabilities.assign(3, {1.0, 0.0});
    const SystemModel model(def);
    const auto bundle = build_bundle(model, Strategy::constant(model, 0), 2, 0, false);
    CHECK(regime_membership(model, AtMostKExits{states(4, {2, 3}), 0}, bundle));
    const auto bare = m1({.with_probabilities = false});
    CHECK_FALSE(regime_membership(bare, AtMostKExits{states(4, {2, 3}), 0},
                                  build_bundle(bare, Strategy::constant(bare, 0), 2, 0, false)));
}

TEST_CASE("stabilize checks the tail window around the center") {
    const auto model = m1({.robust = {0}});
    const auto up = Strategy::constant(model, 1);
    const auto bundle = build_bundle(model, up, 0, 0, true);  // 0,1,2,3
    CHECK(regime_membership(model, Stabilize{3, 0.0, 0}, bundle));
    CHECK(regime_membership(model, Stabilize{3, 1.0, 1}, bundle));
    CHECK_FALSE(regime_membership(model, Stabilize{3, 0.5, 1}, bundle));
    CHECK(regime_membership(model, Stabilize{2, 2.0, 3}, bundle));
    CHECK_FALSE(regime_membership(model, Stabilize{2, 1.5, 3}, bundle));
}

TEST_CASE("control events need one live application") {
    const auto model = m1();
    const auto up = Strategy::constant(model, 1);
    const auto idle = Strategy::constant(model, 0);
    const RegimeSpec push = ControlEvent{ControlSet(2, {1})};
    CHECK(regime_membership(model, push, build_bundle(model, up, 0, 0, true)));
    CHECK_FALSE(regime_membership(model, push, build_bundle(model, idle, 0, 0, true)));
    CHECK_FALSE(regime_membership(model, push, build_bundle(model, up, 0, 3, true)));
}

TEST_CASE("risk containment bounds the measure") {
    const auto model = m1();
    const auto idle = Strategy::constant(model, 0);
    const auto bundle = build_bundle(model, idle, 2, 0, false);
    const RiskMeasureSpec measure = Exceedance{states(4, {2, 3})};
    CHECK(regime_membership(model, RiskContainment{measure, 0.875}, bundle));
    CHECK_FALSE(regime_membership(model, RiskContainment{measure, 0.8}, bundle));
}

TEST_CASE("regime validation") {
    const auto model = m1();
    const auto bare = m1({.with_probabilities = false});
    CHECK_THROWS_AS(validate(bare, StochasticViability{states(4, {2}), 0.5}), ConfigurationError);
    CHECK_THROWS_AS(validate(bare, ProbExcursion{states(4, {2}), 0.5}), ConfigurationError);
    CHECK_NOTHROW(validate(bare, AtMostKExits{states(4, {2}), 1}));
    CHECK_THROWS_AS(validate(model, StochasticViability{states(4, {2}), 1.5}), InputError);
    CHECK_THROWS_AS(validate(model, RobustRecovery{states(4, {2}), 4}), InputError);
    CHECK_THROWS_AS(validate(model, Viability{states(3, {2})}), InputError);
    CHECK_THROWS_AS(validate(model, Stabilize{7, 1.0, 1}), InputError);
    CHECK_THROWS_AS(validate(model, ControlEvent{ControlSet(2)}), InputError);
}

TEST_CASE("regimes reject bundles over the wrong scenario set") {
    const auto model = m1({.robust = {0}});
    const auto idle = Strategy::constant(model, 0);
    CHECK_THROWS_AS(regime_membership(model, StochasticViability{states(4, {2}), 0.5},
                                      build_bundle(model, idle, 2, 0, true)),
                    InputError);
    CHECK_THROWS_AS(regime_membership(model, Viability{states(4, {2})}, build_bundle(model, idle, 2, 0, false)),
                    InputError);
    const auto full = m1();
    CHECK_NOTHROW(regime_membership(full, Viability{states(4, {2})}, build_bundle(full, idle, 2, 0, false)));
}

TEST_CASE("domains of the regimes") {
    const auto a = states(4, {2});
    CHECK(required_domain(RegimeSpec{Viability{a}}) == Domain::Robust);
    CHECK(required_domain(RegimeSpec{StochasticViability{a, 1.0}}) == Domain::Full);
    CHECK(required_domain(RegimeSpec{RiskContainment{Exceedance{a}, 0.1}}) == Domain::Full);
    CHECK(required_domain(RegimeSpec{RiskContainment{WorstCaseViolation{a}, 0.0}}) == Domain::Robust);
    CHECK(std::string(regime_name(RegimeSpec{AtMostKExits{a, 1}})) == "at_most_k_exits");
}
