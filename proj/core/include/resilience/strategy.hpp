#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resilience/model.hpp"

namespace resilience {

enum class PolicyKind { Markovian, Adapted };

/// Strategy class searched by exhaustive procedures.
enum class StrategyClass { Markovian, Adapted };

const char* to_string(StrategyClass c) noexcept;

/// Number of scenario prefixes (w_0, ..., w_{t-1}): the product of |W_r| for r < t.
std::uint64_t prefix_count(const SystemModel& model, int t);

/// Lexicographic rank of the prefix of `scenario` up to time t (exclusive), w_0 most significant.
std::uint64_t prefix_rank(const SystemModel& model, std::span<const Index> scenario, int t);

/// Inverse of prefix_rank.
std::vector<Index> prefix_from_rank(const SystemModel& model, int t, std::uint64_t rank);

/// Decision rule at one time. Markovian policies map a state to a control;
/// adapted policies map (state, scenario prefix) to a control. The control
/// returned at the cemetery is 0 by convention.
class Policy {
public:
    static Policy markovian(int time, std::vector<Index> table);
    /// `table[x * prefixes + rank]` is the control at state x after the prefix of the given rank.
    static Policy adapted(int time, std::size_t num_states, std::uint64_t prefixes, std::vector<Index> table);

    PolicyKind kind() const noexcept { return kind_; }
    int time() const noexcept { return time_; }
    std::size_t num_states() const noexcept { return num_states_; }
    std::uint64_t prefixes() const noexcept { return prefixes_; }
    std::span<const Index> table() const noexcept { return table_; }

    Index control(Index x, std::uint64_t prefix_rank) const noexcept {
        if (x >= num_states_) return 0;
        if (kind_ == PolicyKind::Markovian) return table_[x];
        return table_[x * prefixes_ + prefix_rank];
    }

    bool operator==(const Policy&) const = default;

private:
    Policy(PolicyKind kind, int time, std::size_t num_states, std::uint64_t prefixes, std::vector<Index> table)
        : kind_(kind), time_(time), num_states_(num_states), prefixes_(prefixes), table_(std::move(table)) {}

    PolicyKind kind_;
    int time_;
    std::size_t num_states_;
    std::uint64_t prefixes_;
    std::vector<Index> table_;
};

/// One policy per time 0..K-1. Policies before the start time are kept but unused.
class Strategy {
public:
    explicit Strategy(std::vector<Policy> policies, int start_time = 0);

    static Strategy constant(const SystemModel& model, Index control);
    /// tables[t][x] is the control at time t in state x.
    static Strategy markovian(const SystemModel& model, std::vector<std::vector<Index>> tables);

    const std::vector<Policy>& policies() const noexcept { return policies_; }
    const Policy& policy(int t) const { return policies_.at(t); }
    int start_time() const noexcept { return start_; }
    int horizon() const noexcept { return static_cast<int>(policies_.size()); }
    bool is_markovian() const noexcept;

    Strategy with_start(int t) const;

    /// Throws InputError unless the strategy has the model's horizon, state count, and prefix counts.
    void check_shape(const SystemModel& model) const;

    /// Flattened control tables in (t, x, prefix) order; the lexicographic order used for tie-breaking.
    std::vector<Index> encoding() const;

    bool operator==(const Strategy&) const = default;

private:
    std::vector<Policy> policies_;
    int start_;
};

/// Closed-loop path from the start time to the horizon.
struct Trajectory {
    int start = 0;
    /// x_start .. x_K
    std::vector<Index> states;
    /// u_start .. u_{K-1}
    std::vector<Index> controls;
    Scenario scenario;

    int horizon() const noexcept { return start + static_cast<int>(controls.size()); }
    Index state_at(int s) const { return states.at(static_cast<std::size_t>(s - start)); }
    Index control_at(int s) const { return controls.at(static_cast<std::size_t>(s - start)); }

    bool operator==(const Trajectory&) const = default;
};

enum class Domain { Full, Robust };

/// Closed-loop trajectories from one initial state, one per scenario of the domain.
struct TrajectoryBundle {
    int start = 0;
    Index initial = 0;
    Domain domain = Domain::Full;
    std::vector<Trajectory> trajectories;

    bool operator==(const TrajectoryBundle&) const = default;
};

/// True iff every prescribed control lies in the constraint set.
bool is_admissible(const SystemModel& model, const Strategy& strategy);

Trajectory simulate_closed_loop(const SystemModel& model, const Strategy& strategy, Index x0,
                                const Scenario& scenario, int start = 0);

TrajectoryBundle build_bundle(const SystemModel& model, const Strategy& strategy, Index x0, int start,
                              bool robust_only, std::uint64_t scenario_cap = kDefaultScenarioCap);

/// Builds a bundle over an already enumerated scenario list.
TrajectoryBundle build_bundle(const SystemModel& model, const Strategy& strategy, Index x0, int start,
                              Domain domain, std::span<const Scenario> scenarios);

/// Replays the step recursion and reports whether the trajectory matches it.
bool is_consistent(const SystemModel& model, const Trajectory& trajectory);

}  // namespace resilience
