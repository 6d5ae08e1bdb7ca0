#include "resilience/regimes.hpp"

#include <cmath>
#include <string>

namespace resilience {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void check_state_set(const SystemModel& model, const StateSet& set, const char* what) {
    if (set.universe() != model.num_states())
        throw InputError(std::string(what) + " has universe " + std::to_string(set.universe()) +
                         ", model has " + std::to_string(model.num_states()) + " states");
}

void check_probability_level(double beta, const char* what) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw InputError(std::string(what) + " must lie in [0,1]");
}

void require_probabilities(const SystemModel& model, const char* regime) {
    if (!model.has_probabilities())
        throw ConfigurationError(std::string("regime ") + regime + " requires probabilities");
}

bool state_ok(const StateSet& a, Index x) { return a.contains(x); }

/// x_s in A for all s, and u_s admissible for all s < K.
bool stays_viable(const SystemModel& model, const Trajectory& traj, const StateSet& a, bool use_constraints) {
    const int K = traj.horizon();
    for (int s = traj.start; s <= K; ++s) {
        const Index x = traj.state_at(s);
        if (!state_ok(a, x)) return false;
        if (use_constraints && s < K && !model.allowed(s, x, traj.control_at(s))) return false;
    }
    return true;
}

double probability_of(const SystemModel& model, const TrajectoryBundle& bundle,
                      const auto& predicate) {
    double p = 0.0;
    for (const auto& traj : bundle.trajectories)
        if (predicate(traj)) p += model.scenario_weight(traj.scenario);
    return p;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d);
}

}  // namespace

const char* regime_name(const RegimeSpec& regime) noexcept {
    return std::visit(overloaded{
                          [](const Viability&) { return "viability"; },
                          [](const RobustRecovery&) { return "robust_recovery"; },
                          [](const StochasticViability&) { return "stochastic_viability"; },
                          [](const Bounded&) { return "bounded"; },
                          [](const ProbExcursion&) { return "prob_excursion"; },
                          [](const AtMostKExits&) { return "at_most_k_exits"; },
                          [](const Stabilize&) { return "stabilize"; },
                          [](const ControlEvent&) { return "control_event"; },
                          [](const RiskContainment&) { return "risk_containment"; },
                      },
                      regime);
}

Domain required_domain(const RegimeSpec& regime) {
    return std::visit(overloaded{
                          [](const StochasticViability&) { return Domain::Full; },
                          [](const ProbExcursion&) { return Domain::Full; },
                          [](const AtMostKExits&) { return Domain::Full; },
                          [](const RiskContainment& r) { return required_domain(r.measure); },
                          [](const auto&) { return Domain::Robust; },
                      },
                      regime);
}

void validate(const SystemModel& model, const RegimeSpec& regime) {
    const int K = model.horizon();
    std::visit(overloaded{
                   [&](const Viability& r) { check_state_set(model, r.acceptable, "acceptable set"); },
                   [&](const RobustRecovery& r) {
                       check_state_set(model, r.acceptable, "acceptable set");
                       if (r.deadline < 0 || r.deadline > K)
                           throw InputError("deadline " + std::to_string(r.deadline) + " outside 0.." +
                                            std::to_string(K));
                   },
                   [&](const StochasticViability& r) {
                       check_state_set(model, r.acceptable, "acceptable set");
                       check_probability_level(r.beta, "beta");
                       require_probabilities(model, "stochastic_viability");
                   },
                   [&](const Bounded& r) { check_state_set(model, r.region, "region"); },
                   [&](const ProbExcursion& r) {
                       check_state_set(model, r.region, "region");
                       check_probability_level(r.beta, "beta");
                       require_probabilities(model, "prob_excursion");
                   },
                   [&](const AtMostKExits& r) {
                       check_state_set(model, r.region, "region");
                       if (r.max_exits < 0) throw InputError("exit bound k must be nonnegative");
                   },
                   [&](const Stabilize& r) {
                       if (r.center >= model.num_states()) throw InputError("stabilize center out of range");
                       if (!(r.radius >= 0.0)) throw InputError("stabilize radius must be nonnegative");
                       if (r.window < 0 || r.window > K)
                           throw InputError("stabilize window outside 0.." + std::to_string(K));
                   },
                   [&](const ControlEvent& r) {
                       if (r.controls.universe() != model.num_controls())
                           throw InputError("control set universe does not match the model");
                       if (r.controls.empty()) throw InputError("control event set must be nonempty");
                   },
                   [&](const RiskContainment& r) { validate(model, r.measure); },
               },
               regime);
}

void check_domain(const SystemModel& model, Domain required, const TrajectoryBundle& bundle) {
    if (bundle.domain == required || model.robust_is_full()) return;
    throw InputError(required == Domain::Robust ? "regime requires a bundle over the robust scenario set"
                                                : "regime requires a bundle over the full scenario set");
}

bool regime_membership(const SystemModel& model, const RegimeSpec& regime, const TrajectoryBundle& bundle) {
    validate(model, regime);
    check_domain(model, required_domain(regime), bundle);
    const auto& trajs = bundle.trajectories;
    const int K = model.horizon();

    return std::visit(
        overloaded{
            [&](const Viability& r) {
                for (const auto& traj : trajs)
                    if (!stays_viable(model, traj, r.acceptable, true)) return false;
                return true;
            },
            [&](const RobustRecovery& r) {
                for (const auto& traj : trajs) {
                    const RecoveryTime tau = recovery_time(model, traj, r.acceptable);
                    if (!tau || *tau > r.deadline) return false;
                }
                return true;
            },
            [&](const StochasticViability& r) {
                const double exceed = probability_of(model, bundle, [&](const Trajectory& traj) {
                    return !stays_viable(model, traj, r.acceptable, true);
                });
                return exceed <= 1.0 - r.beta + kComparisonTolerance;
            },
            [&](const Bounded& r) {
                for (const auto& traj : trajs)
                    if (!stays_viable(model, traj, r.region, false)) return false;
                return true;
            },
            [&](const ProbExcursion& r) {
                const double p = probability_of(model, bundle, [&](const Trajectory& traj) {
                    return !stays_viable(model, traj, r.region, r.count_controls);
                });
                return p <= r.beta + kComparisonTolerance;
            },
            [&](const AtMostKExits& r) {
                const bool weighted = model.has_probabilities();
                for (const auto& traj : trajs) {
                    if (weighted && model.scenario_weight(traj.scenario) <= 0.0) continue;
                    if (static_cast<int>(exit_times(model, traj, r.region, r.count_controls).size()) > r.max_exits)
                        return false;
                }
                return true;
            },
            [&](const Stabilize& r) {
                const auto center = model.state_coords(r.center);
                for (const auto& traj : trajs) {
                    for (int s = std::max(traj.start, K - r.window); s <= K; ++s) {
                        const Index x = traj.state_at(s);
                        if (x == model.cemetery()) return false;
                        if (distance(model.state_coords(x), center) > r.radius) return false;
                    }
                }
                return true;
            },
            [&](const ControlEvent& r) {
                for (const auto& traj : trajs) {
                    bool hit = false;
                    for (int s = traj.start; s < K && !hit; ++s)
                        hit = traj.state_at(s) != model.cemetery() && r.controls.contains(traj.control_at(s));
                    if (!hit) return false;
                }
                return true;
            },
            [&](const RiskContainment& r) {
                return evaluate_risk(model, r.measure, bundle) <= r.alpha + kComparisonTolerance;
            },
        },
        regime);
}

std::vector<int> exit_times(const SystemModel& model, const Trajectory& trajectory, const StateSet& acceptable,
                            bool use_constraints) {
    std::vector<int> out;
    const int K = trajectory.horizon();
    for (int s = trajectory.start; s <= K; ++s) {
        const Index x = trajectory.state_at(s);
        bool exits = !acceptable.contains(x);
        if (!exits && use_constraints && s < K) exits = !model.allowed(s, x, trajectory.control_at(s));
        if (exits) out.push_back(s);
    }
    return out;
}

RecoveryTime recovery_time(const SystemModel& model, const Trajectory& trajectory, const StateSet& acceptable) {
    const int K = trajectory.horizon();
    // Scan backwards: r is feasible iff every s >= r is good.
    RecoveryTime best;
    for (int s = K; s >= trajectory.start; --s) {
        const Index x = trajectory.state_at(s);
        bool good = acceptable.contains(x);
        if (good && s < K) good = model.allowed(s, x, trajectory.control_at(s));
        if (!good) break;
        best = s;
    }
    return best;
}

}  // namespace resilience
