#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "resilience/model.hpp"
#include "resilience/risk.hpp"
#include "resilience/strategy.hpp"

namespace resilience {

/// Recovery time: an absolute time index, or nullopt for +infinity.
using RecoveryTime = std::optional<int>;

// Recovery regimes. Unless noted otherwise a regime quantifies over the
// robust scenario set.

/// x_s in A and u_s admissible for every s >= t.
struct Viability {
    StateSet acceptable;
    bool operator==(const Viability&) const = default;
};

/// Worst-case recovery time into A is at most `deadline` (an absolute time).
struct RobustRecovery {
    StateSet acceptable;
    int deadline = 0;
    bool operator==(const RobustRecovery&) const = default;
};

/// P[x_s in A and u_s admissible for all s >= t] >= beta. Full scenario set.
struct StochasticViability {
    StateSet acceptable;
    double beta = 1.0;
    bool operator==(const StochasticViability&) const = default;
};

/// x_s in B for every s >= t.
struct Bounded {
    StateSet region;
    bool operator==(const Bounded&) const = default;
};

/// P[some s >= t has x_s outside B] <= beta. Full scenario set.
struct ProbExcursion {
    StateSet region;
    double beta = 0.0;
    /// Also count inadmissible controls as excursions.
    bool count_controls = false;
    bool operator==(const ProbExcursion&) const = default;
};

/// Almost surely at most k times s >= t with x_s outside B. Full scenario
/// set; scenarios of zero probability are ignored when probabilities exist.
struct AtMostKExits {
    StateSet region;
    int max_exits = 2;
    bool count_controls = false;
    bool operator==(const AtMostKExits&) const = default;
};

/// Finite-horizon convergence surrogate: every state at times
/// s >= max(t, K - window) lies within `radius` of the center's coordinates.
struct Stabilize {
    Index center = 0;
    double radius = 0.0;
    int window = 0;
    bool operator==(const Stabilize&) const = default;
};

/// Some time s in t..K-1 (at a listed state) applies a control in C.
struct ControlEvent {
    ControlSet controls;
    bool operator==(const ControlEvent&) const = default;
};

/// The risk measure evaluated on the bundle is at most alpha.
struct RiskContainment {
    RiskMeasureSpec measure;
    double alpha = 0.0;
    bool operator==(const RiskContainment&) const = default;
};

using RegimeSpec = std::variant<Viability, RobustRecovery, StochasticViability, Bounded, ProbExcursion,
                                AtMostKExits, Stabilize, ControlEvent, RiskContainment>;

const char* regime_name(const RegimeSpec& regime) noexcept;

/// Scenario set the regime quantifies over.
Domain required_domain(const RegimeSpec& regime);

/// Throws InputError or ConfigurationError when the regime does not fit the model.
void validate(const SystemModel& model, const RegimeSpec& regime);

/// Throws InputError if the bundle's domain differs from the required one
/// (a robust set equal to the full set satisfies both).
void check_domain(const SystemModel& model, Domain required, const TrajectoryBundle& bundle);

bool regime_membership(const SystemModel& model, const RegimeSpec& regime, const TrajectoryBundle& bundle);

/// Times s with x_s outside A, or, when `use_constraints`, u_s outside the
/// constraint set (s < K only).
std::vector<int> exit_times(const SystemModel& model, const Trajectory& trajectory, const StateSet& acceptable,
                            bool use_constraints);

/// Least r >= start such that x_s is in A and u_s is admissible for all s >= r.
RecoveryTime recovery_time(const SystemModel& model, const Trajectory& trajectory, const StateSet& acceptable);

}  // namespace resilience
