#pragma once

#include <span>
#include <variant>
#include <vector>

#include "resilience/model.hpp"
#include "resilience/strategy.hpp"

namespace resilience {

inline constexpr double kDefaultCemeteryPenalty = 1e18;

// Per-trajectory cost functions. Each time step spent at the cemetery
// contributes the cemetery penalty in place of the regular per-step term.

/// Number of times s with x_s outside A or u_s outside the constraint set.
struct TimeOutsideCost {
    StateSet acceptable;
    bool operator==(const TimeOutsideCost&) const = default;
};

/// Sum of per-control costs; an empty table means each control's first coordinate.
struct ControlEffortCost {
    std::vector<double> per_control;
    bool operator==(const ControlEffortCost&) const = default;
};

/// 0 if x_K is in A, 1 otherwise.
struct TerminalCost {
    StateSet acceptable;
    bool operator==(const TerminalCost&) const = default;
};

/// Sum of state_cost[s][x_s] over s = t..K and control_cost[s][u_s] over s = t..K-1.
struct TabularCost {
    std::vector<std::vector<double>> state_cost;
    std::vector<std::vector<double>> control_cost;
    bool operator==(const TabularCost&) const = default;
};

/// Recovery time into A measured from the trajectory start; +inf when the
/// trajectory never recovers.
struct RecoveryTimeCost {
    StateSet acceptable;
    bool operator==(const RecoveryTimeCost&) const = default;
};

struct CostFunction {
    std::variant<TimeOutsideCost, ControlEffortCost, TerminalCost, TabularCost, RecoveryTimeCost> kind;
    double cemetery_penalty = kDefaultCemeteryPenalty;

    bool operator==(const CostFunction&) const = default;
    /// Additive over time steps (every kind except RecoveryTimeCost).
    bool is_additive() const noexcept { return !std::holds_alternative<RecoveryTimeCost>(kind); }
};

/// Functional that reduces a random cost to a number.
struct OuterFunctional {
    enum class Kind { Expectation, WorstCase, CVaR };
    Kind kind = Kind::Expectation;
    /// Tail mass for CVaR, in (0, 1].
    double level = 1.0;

    bool operator==(const OuterFunctional&) const = default;
};

/// 1 if some robust scenario visits a state outside A, else 0.
struct WorstCaseViolation {
    StateSet acceptable;
    bool operator==(const WorstCaseViolation&) const = default;
};

/// Probability that some time s has x_s outside A or u_s outside the constraint set.
struct Exceedance {
    StateSet acceptable;
    bool operator==(const Exceedance&) const = default;
};

/// One probability vector per time.
using ProbabilityAssignment = std::vector<std::vector<double>>;

/// Largest exceedance probability over a family of product distributions.
struct AmbiguityExceedance {
    StateSet acceptable;
    std::vector<ProbabilityAssignment> members;
    bool operator==(const AmbiguityExceedance&) const = default;
};

/// Outer functional of the number of exits (counting measure on time).
struct ExitCountFunctional {
    StateSet acceptable;
    OuterFunctional outer;
    bool operator==(const ExitCountFunctional&) const = default;
};

/// Outer functional of a per-trajectory cost.
struct ComposedRisk {
    CostFunction cost;
    OuterFunctional outer;
    bool operator==(const ComposedRisk&) const = default;
};

using RiskMeasureSpec =
    std::variant<WorstCaseViolation, Exceedance, AmbiguityExceedance, ExitCountFunctional, ComposedRisk>;

/// Scenario set a risk measure quantifies over.
Domain required_domain(const RiskMeasureSpec& spec);

/// Throws InputError or ConfigurationError when the measure does not fit the model.
void validate(const SystemModel& model, const RiskMeasureSpec& spec);

double evaluate_risk(const SystemModel& model, const RiskMeasureSpec& spec, const TrajectoryBundle& bundle);

struct WeightedValue {
    double value;
    double probability;
};

/// Conditional value-at-risk with tail mass `level`: the mean of the worst
/// `level`-probability tail, equivalently min over eta of
/// eta + E[(Z - eta)^+] / level. level = 1 gives the mean.
double cvar(std::span<const WeightedValue> values, double level);

double evaluate_cost(const SystemModel& model, const CostFunction& cost, const Trajectory& trajectory);

/// Min-max recovery time risk: worst-case recovery time into A over the robust scenarios.
RiskMeasureSpec max_recovery_time_risk(const StateSet& acceptable);

}  // namespace resilience
