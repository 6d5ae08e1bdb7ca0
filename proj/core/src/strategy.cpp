#include "resilience/strategy.hpp"

#include <string>

namespace resilience {

const char* to_string(StrategyClass c) noexcept {
    return c == StrategyClass::Markovian ? "markov" : "adapted";
}

std::uint64_t prefix_count(const SystemModel& model, int t) {
    std::uint64_t n = 1;
    for (int r = 0; r < t; ++r) n = saturating_mul(n, model.num_uncertainties(r));
    return n;
}

std::uint64_t prefix_rank(const SystemModel& model, std::span<const Index> scenario, int t) {
    std::uint64_t rank = 0;
    for (int r = 0; r < t; ++r) rank = rank * model.num_uncertainties(r) + scenario[r];
    return rank;
}

std::vector<Index> prefix_from_rank(const SystemModel& model, int t, std::uint64_t rank) {
    std::vector<Index> prefix(static_cast<std::size_t>(t));
    for (int r = t - 1; r >= 0; --r) {
        const std::uint64_t n = model.num_uncertainties(r);
        prefix[r] = static_cast<Index>(rank % n);
        rank /= n;
    }
    return prefix;
}

Policy Policy::markovian(int time, std::vector<Index> table) {
    const std::size_t n = table.size();
    return Policy(PolicyKind::Markovian, time, n, 1, std::move(table));
}

Policy Policy::adapted(int time, std::size_t num_states, std::uint64_t prefixes, std::vector<Index> table) {
    if (table.size() != num_states * prefixes)
        throw InputError("adapted policy table at time " + std::to_string(time) + " has " +
                         std::to_string(table.size()) + " entries, expected " +
                         std::to_string(num_states * prefixes));
    return Policy(PolicyKind::Adapted, time, num_states, prefixes, std::move(table));
}

Strategy::Strategy(std::vector<Policy> policies, int start_time)
    : policies_(std::move(policies)), start_(start_time) {
    for (std::size_t t = 0; t < policies_.size(); ++t)
        if (policies_[t].time() != static_cast<int>(t))
            throw InputError("policy at position " + std::to_string(t) + " is labeled time " +
                             std::to_string(policies_[t].time()));
    if (start_ < 0 || start_ > static_cast<int>(policies_.size()))
        throw InputError("strategy start time " + std::to_string(start_) + " out of range");
}

Strategy Strategy::constant(const SystemModel& model, Index control) {
    if (control >= model.num_controls()) throw InputError("control index out of range");
    std::vector<Policy> policies;
    for (int t = 0; t < model.horizon(); ++t)
        policies.push_back(Policy::markovian(t, std::vector<Index>(model.num_states(), control)));
    return Strategy(std::move(policies));
}

Strategy Strategy::markovian(const SystemModel& model, std::vector<std::vector<Index>> tables) {
    if (tables.size() != static_cast<std::size_t>(model.horizon()))
        throw InputError("expected one policy table per time");
    std::vector<Policy> policies;
    for (int t = 0; t < model.horizon(); ++t) policies.push_back(Policy::markovian(t, std::move(tables[t])));
    Strategy s(std::move(policies));
    s.check_shape(model);
    return s;
}

bool Strategy::is_markovian() const noexcept {
    for (const auto& p : policies_)
        if (p.kind() != PolicyKind::Markovian) return false;
    return true;
}

Strategy Strategy::with_start(int t) const { return Strategy(policies_, t); }

void Strategy::check_shape(const SystemModel& model) const {
    if (horizon() != model.horizon())
        throw InputError("strategy has " + std::to_string(horizon()) + " policies, model horizon is " +
                         std::to_string(model.horizon()));
    for (const auto& p : policies_) {
        if (p.num_states() != model.num_states())
            throw InputError("policy at time " + std::to_string(p.time()) + " covers " +
                             std::to_string(p.num_states()) + " states, model has " +
                             std::to_string(model.num_states()));
        if (p.kind() == PolicyKind::Adapted && p.prefixes() != prefix_count(model, p.time()))
            throw InputError("adapted policy at time " + std::to_string(p.time()) + " has wrong prefix count");
        for (Index u : p.table())
            if (u >= model.num_controls())
                throw InputError("policy at time " + std::to_string(p.time()) + " uses control index " +
                                 std::to_string(u) + " out of range");
    }
}

std::vector<Index> Strategy::encoding() const {
    std::vector<Index> code;
    for (const auto& p : policies_) code.insert(code.end(), p.table().begin(), p.table().end());
    return code;
}

bool is_admissible(const SystemModel& model, const Strategy& strategy) {
    strategy.check_shape(model);
    for (const auto& p : strategy.policies()) {
        for (Index x = 0; x < model.num_states(); ++x)
            for (std::uint64_t r = 0; r < p.prefixes(); ++r)
                if (!model.allowed(p.time(), x, p.control(x, r))) return false;
    }
    return true;
}

Trajectory simulate_closed_loop(const SystemModel& model, const Strategy& strategy, Index x0,
                                const Scenario& scenario, int start) {
    const int K = model.horizon();
    if (start < 0 || start > K) throw InputError("start time out of range");
    if (x0 >= model.cemetery()) throw InputError("initial state must be a listed state");
    if (scenario.size() != static_cast<std::size_t>(K)) throw InputError("scenario length must equal the horizon");
    if (strategy.horizon() != K) throw InputError("strategy horizon does not match model");

    Trajectory traj;
    traj.start = start;
    traj.scenario = scenario;
    traj.states.reserve(static_cast<std::size_t>(K - start + 1));
    traj.controls.reserve(static_cast<std::size_t>(K - start));
    Index x = x0;
    traj.states.push_back(x);
    for (int s = start; s < K; ++s) {
        const Policy& policy = strategy.policy(s);
        const std::uint64_t rank = policy.kind() == PolicyKind::Adapted ? prefix_rank(model, scenario, s) : 0;
        const Index u = policy.control(x, rank);
        traj.controls.push_back(u);
        x = model.step(s, x, u, scenario[s]);
        traj.states.push_back(x);
    }
    return traj;
}

TrajectoryBundle build_bundle(const SystemModel& model, const Strategy& strategy, Index x0, int start,
                              Domain domain, std::span<const Scenario> scenarios) {
    TrajectoryBundle bundle;
    bundle.start = start;
    bundle.initial = x0;
    bundle.domain = domain;
    bundle.trajectories.reserve(scenarios.size());
    for (const auto& s : scenarios) bundle.trajectories.push_back(simulate_closed_loop(model, strategy, x0, s, start));
    return bundle;
}

TrajectoryBundle build_bundle(const SystemModel& model, const Strategy& strategy, Index x0, int start,
                              bool robust_only, std::uint64_t scenario_cap) {
    const auto scenarios = enumerate_scenarios(model, robust_only, scenario_cap);
    return build_bundle(model, strategy, x0, start, robust_only ? Domain::Robust : Domain::Full, scenarios);
}

bool is_consistent(const SystemModel& model, const Trajectory& trajectory) {
    const int K = model.horizon();
    if (trajectory.scenario.size() != static_cast<std::size_t>(K)) return false;
    if (trajectory.states.size() != static_cast<std::size_t>(K - trajectory.start + 1)) return false;
    if (trajectory.controls.size() + 1 != trajectory.states.size()) return false;
    for (int s = trajectory.start; s < K; ++s) {
        if (model.step(s, trajectory.state_at(s), trajectory.control_at(s), trajectory.scenario[s]) !=
            trajectory.state_at(s + 1))
            return false;
    }
    return true;
}

}  // namespace resilience
