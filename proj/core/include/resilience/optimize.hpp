#pragma once

#include <cstdint>
#include <optional>

#include "resilience/engine.hpp"
#include "resilience/enumeration.hpp"
#include "resilience/regimes.hpp"
#include "resilience/risk.hpp"

namespace resilience {

struct OptimizationResult {
    /// False when no strategy of the class satisfies the regime.
    bool resilient = false;
    std::optional<Strategy> strategy;
    /// Minimal risk; +inf when not resilient.
    double value = 0.0;
    /// Resilient strategies whose risk was evaluated (0 on the DP route).
    std::uint64_t examined = 0;
    Certificate certificate = Certificate::Exhaustive;
    StrategyClass strategy_class = StrategyClass::Markovian;
};

struct OptimizeOptions : SearchOptions {
    /// Use the constrained cost recursion when the regime/risk pair allows it.
    bool allow_dp = true;
};

/// True when minimize_risk can use the constrained dynamic-programming
/// route: viability regime over the full scenario set (or stochastic
/// viability at level 1 with positive probabilities), expected additive
/// cost, per-time probabilities, Markovian class.
bool has_dp_route(const SystemModel& model, const RegimeSpec& regime, const RiskMeasureSpec& risk,
                  StrategyClass strategy_class);

/// Minimizes the risk over resilient strategies of the class. Exhaustive
/// search keeps the lexicographically least minimizer.
OptimizationResult minimize_risk(const SystemModel& model, Index x0, int t, const RegimeSpec& regime,
                                 const RiskMeasureSpec& risk, StrategyClass strategy_class,
                                 const OptimizeOptions& options = {});

/// Minimal achievable risk among resilient strategies; +inf when none exists.
double resilience_indicator(const SystemModel& model, Index x0, const RegimeSpec& regime, const RiskMeasureSpec& risk,
                            StrategyClass strategy_class = StrategyClass::Markovian,
                            const OptimizeOptions& options = {}, int t = 0);

}  // namespace resilience
