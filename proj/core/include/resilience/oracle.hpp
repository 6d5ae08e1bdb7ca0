#pragma once

#include "resilience/enumeration.hpp"
#include "resilience/model.hpp"
#include "resilience/regimes.hpp"
#include "resilience/risk.hpp"
#include "resilience/strategy.hpp"

// Brute-force reference implementations. Everything here is computed by
// enumerating strategies, simulating every scenario, and applying the
// regime and risk definitions directly. Nothing in this file calls the
// dynamic-programming engine or the optimizer.

namespace resilience::oracle {

/// States at time t from which some strategy of the class satisfies the regime.
StateSet resilient_states(const SystemModel& model, int t, const RegimeSpec& regime, StrategyClass strategy_class,
                          const SearchOptions& options = {});

/// Minimum of the risk over strategies satisfying the regime; +inf when there is none.
double min_risk(const SystemModel& model, Index x0, int t, const RegimeSpec& regime, const RiskMeasureSpec& risk,
                StrategyClass strategy_class, const SearchOptions& options = {});

/// Largest probability, over strategies of the class, that x_s stays in A
/// with admissible controls for all s >= t.
double max_viability_probability(const SystemModel& model, Index x0, int t, const StateSet& acceptable,
                                 StrategyClass strategy_class, const SearchOptions& options = {});

/// Minimum over strategies of the worst-case (robust scenarios) recovery time into A.
RecoveryTime min_max_recovery_time(const SystemModel& model, Index x0, int t, const StateSet& acceptable,
                                   StrategyClass strategy_class, const SearchOptions& options = {});

}  // namespace resilience::oracle
