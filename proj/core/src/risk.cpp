#include "resilience/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "resilience/regimes.hpp"

namespace resilience {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

void check_set(const SystemModel& model, const StateSet& set) {
    if (set.universe() != model.num_states())
        throw InputError("state set universe " + std::to_string(set.universe()) + " does not match the model (" +
                         std::to_string(model.num_states()) + " states)");
}

void check_outer(const SystemModel& model, const OuterFunctional& outer) {
    if (outer.kind == OuterFunctional::Kind::CVaR && !(outer.level > 0.0 && outer.level <= 1.0))
        throw InputError("CVaR level must lie in (0,1]");
    if (outer.kind != OuterFunctional::Kind::WorstCase && !model.has_probabilities())
        throw ConfigurationError("expectation and CVaR require probabilities");
}

void check_cost(const SystemModel& model, const CostFunction& cost) {
    const auto K = static_cast<std::size_t>(model.horizon());
    std::visit(overloaded{
                   [&](const TimeOutsideCost& c) { check_set(model, c.acceptable); },
                   [&](const TerminalCost& c) { check_set(model, c.acceptable); },
                   [&](const RecoveryTimeCost& c) { check_set(model, c.acceptable); },
                   [&](const ControlEffortCost& c) {
                       if (!c.per_control.empty() && c.per_control.size() != model.num_controls())
                           throw InputError("control effort table must have one entry per control");
                   },
                   [&](const TabularCost& c) {
                       if (c.state_cost.size() != K + 1 || c.control_cost.size() != K)
                           throw InputError("tabular cost needs state costs for 0..K and control costs for 0..K-1");
                       for (const auto& row : c.state_cost)
                           if (row.size() != model.num_states()) throw InputError("tabular state cost row has wrong size");
                       for (const auto& row : c.control_cost)
                           if (row.size() != model.num_controls())
                               throw InputError("tabular control cost row has wrong size");
                   },
               },
               cost.kind);
}

void check_assignment(const SystemModel& model, const ProbabilityAssignment& p) {
    if (p.size() != static_cast<std::size_t>(model.horizon()))
        throw InputError("ambiguity member must assign probabilities at every time");
    for (int t = 0; t < model.horizon(); ++t) {
        if (p[t].size() != model.num_uncertainties(t))
            throw InputError("ambiguity member has wrong vector size at time " + std::to_string(t));
        double s = 0.0;
        for (double v : p[t]) {
            if (!(v >= 0.0)) throw InputError("ambiguity member has a negative probability");
            s += v;
        }
        if (std::abs(s - 1.0) > kProbabilitySumTolerance)
            throw InputError("ambiguity member probabilities do not sum to 1 at time " + std::to_string(t));
    }
}

bool exits_somewhere(const SystemModel& model, const Trajectory& traj, const StateSet& a) {
    return !exit_times(model, traj, a, true).empty();
}

double reduce(const SystemModel& model, const OuterFunctional& outer, const TrajectoryBundle& bundle,
              const auto& value_of) {
    if (outer.kind == OuterFunctional::Kind::WorstCase) {
        double worst = -kInfinity;
        for (const auto& traj : bundle.trajectories) worst = std::max(worst, value_of(traj));
        return worst;
    }
    std::vector<WeightedValue> values;
    values.reserve(bundle.trajectories.size());
    for (const auto& traj : bundle.trajectories) {
        const double w = model.scenario_weight(traj.scenario);
        if (w > 0.0) values.push_back({value_of(traj), w});
    }
    if (outer.kind == OuterFunctional::Kind::Expectation) {
        double sum = 0.0;
        for (const auto& v : values) sum += v.probability * v.value;
        return sum;
    }
    return cvar(values, outer.level);
}

}  // namespace

Domain required_domain(const RiskMeasureSpec& spec) {
    return std::visit(overloaded{
                          [](const WorstCaseViolation&) { return Domain::Robust; },
                          [](const Exceedance&) { return Domain::Full; },
                          [](const AmbiguityExceedance&) { return Domain::Full; },
                          [](const ExitCountFunctional& r) {
                              return r.outer.kind == OuterFunctional::Kind::WorstCase ? Domain::Robust : Domain::Full;
                          },
                          [](const ComposedRisk& r) {
                              return r.outer.kind == OuterFunctional::Kind::WorstCase ? Domain::Robust : Domain::Full;
                          },
                      },
                      spec);
}

void validate(const SystemModel& model, const RiskMeasureSpec& spec) {
    std::visit(overloaded{
                   [&](const WorstCaseViolation& r) { check_set(model, r.acceptable); },
                   [&](const Exceedance& r) {
                       check_set(model, r.acceptable);
                       if (!model.has_probabilities()) throw ConfigurationError("exceedance requires probabilities");
                   },
                   [&](const AmbiguityExceedance& r) {
                       check_set(model, r.acceptable);
                       if (r.members.empty()) throw InputError("ambiguity set must be nonempty");
                       for (const auto& p : r.members) check_assignment(model, p);
                   },
                   [&](const ExitCountFunctional& r) {
                       check_set(model, r.acceptable);
                       check_outer(model, r.outer);
                   },
                   [&](const ComposedRisk& r) {
                       check_cost(model, r.cost);
                       check_outer(model, r.outer);
                   },
               },
               spec);
}

double evaluate_risk(const SystemModel& model, const RiskMeasureSpec& spec, const TrajectoryBundle& bundle) {
    validate(model, spec);
    check_domain(model, required_domain(spec), bundle);

    return std::visit(
        overloaded{
            [&](const WorstCaseViolation& r) {
                for (const auto& traj : bundle.trajectories)
                    for (Index x : traj.states)
                        if (!r.acceptable.contains(x)) return 1.0;
                return 0.0;
            },
            [&](const Exceedance& r) {
                double p = 0.0;
                for (const auto& traj : bundle.trajectories)
                    if (exits_somewhere(model, traj, r.acceptable)) p += model.scenario_weight(traj.scenario);
                return p;
            },
            [&](const AmbiguityExceedance& r) {
                double worst = 0.0;
                for (const auto& member : r.members) {
                    double p = 0.0;
                    for (const auto& traj : bundle.trajectories) {
                        if (!exits_somewhere(model, traj, r.acceptable)) continue;
                        double w = 1.0;
                        for (int t = 0; t < model.horizon(); ++t) w *= member[t][traj.scenario[t]];
                        p += w;
                    }
                    worst = std::max(worst, p);
                }
                return worst;
            },
            [&](const ExitCountFunctional& r) {
                return reduce(model, r.outer, bundle, [&](const Trajectory& traj) {
                    return static_cast<double>(exit_times(model, traj, r.acceptable, true).size());
                });
            },
            [&](const ComposedRisk& r) {
                return reduce(model, r.outer, bundle,
                              [&](const Trajectory& traj) { return evaluate_cost(model, r.cost, traj); });
            },
        },
        spec);
}

double cvar(std::span<const WeightedValue> values, double level) {
    if (!(level > 0.0 && level <= 1.0)) throw InputError("CVaR level must lie in (0,1]");
    if (values.empty()) throw InputError("CVaR of an empty distribution");
    double total = 0.0;
    for (const auto& v : values) {
        if (!(v.probability >= 0.0)) throw InputError("negative probability in CVaR input");
        total += v.probability;
    }
    if (std::abs(total - 1.0) > kProbabilitySumTolerance) throw InputError("CVaR probabilities do not sum to 1");

    std::vector<WeightedValue> sorted(values.begin(), values.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const WeightedValue& a, const WeightedValue& b) { return a.value > b.value; });
    double remaining = level;
    double sum = 0.0;
    for (const auto& v : sorted) {
        if (remaining <= 0.0) break;
        const double take = std::min(v.probability, remaining);
        if (take > 0.0) sum += take * v.value;
        remaining -= take;
    }
    return sum / level;
}

double evaluate_cost(const SystemModel& model, const CostFunction& cost, const Trajectory& trajectory) {
    const int K = trajectory.horizon();
    const Index cemetery = model.cemetery();

    if (const auto* rc = std::get_if<RecoveryTimeCost>(&cost.kind)) {
        const RecoveryTime tau = recovery_time(model, trajectory, rc->acceptable);
        return tau ? static_cast<double>(*tau - trajectory.start) : kInfinity;
    }

    double total = 0.0;
    for (int s = trajectory.start; s <= K; ++s) {
        const Index x = trajectory.state_at(s);
        if (x == cemetery) {
            total += cost.cemetery_penalty;
            continue;
        }
        const bool has_control = s < K;
        const Index u = has_control ? trajectory.control_at(s) : 0;
        total += std::visit(overloaded{
                                [&](const TimeOutsideCost& c) {
                                    const bool out = !c.acceptable.contains(x) ||
                                                     (has_control && !model.allowed(s, x, u));
                                    return out ? 1.0 : 0.0;
                                },
                                [&](const ControlEffortCost& c) {
                                    if (!has_control) return 0.0;
                                    return c.per_control.empty() ? model.control_coords(u)[0] : c.per_control.at(u);
                                },
                                [&](const TerminalCost& c) {
                                    if (has_control) return 0.0;
                                    return c.acceptable.contains(x) ? 0.0 : 1.0;
                                },
                                [&](const TabularCost& c) {
                                    double v = c.state_cost.at(s).at(x);
                                    if (has_control) v += c.control_cost.at(s).at(u);
                                    return v;
                                },
                                [&](const RecoveryTimeCost&) { return 0.0; },
                            },
                            cost.kind);
    }
    return total;
}

RiskMeasureSpec max_recovery_time_risk(const StateSet& acceptable) {
    return ComposedRisk{CostFunction{RecoveryTimeCost{acceptable}},
                        OuterFunctional{OuterFunctional::Kind::WorstCase, 1.0}};
}

}  // namespace resilience
