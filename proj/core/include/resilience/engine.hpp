#pragma once

#include <optional>
#include <vector>

#include "resilience/enumeration.hpp"
#include "resilience/model.hpp"
#include "resilience/regimes.hpp"
#include "resilience/strategy.hpp"

namespace resilience {

enum class Certificate { Exhaustive, DynamicProgramming };

const char* to_string(Certificate c) noexcept;

/// Robust viability kernel per time, with one witnessing control per state.
struct KernelTable {
    /// members[t] for t = 0..K.
    std::vector<StateSet> members;
    /// witness[t][x] for t = 0..K-1: the least control keeping every robust
    /// successor in the kernel when x is a member, the least admissible
    /// control otherwise.
    std::vector<std::vector<Index>> witness;

    /// Markovian strategy playing the witness controls, starting at `start`.
    Strategy witness_strategy(int start = 0) const;
};

/// Maximal probability of staying viable, per time and state.
struct ValueTable {
    /// value[t][x] for t = 0..K; the cemetery has value 0.
    std::vector<std::vector<double>> value;
    /// witness[t][x] for t = 0..K-1: least maximizing control.
    std::vector<std::vector<Index>> witness;

    /// {x : V_t(x) >= beta}, compared with kComparisonTolerance.
    StateSet resilient(int t, double beta) const;
    Strategy witness_strategy(int start = 0) const;
};

/// Min-max recovery offsets into the robust kernel.
struct RecoveryTable {
    int deadline = 0;
    /// offset[t][x]: least k such that some strategy guarantees recovery by
    /// t + k from x at time t; nullopt when no k <= K - t works.
    std::vector<std::vector<std::optional<int>>> offset;
    /// witness[t][x] for t = 0..K-1: least control attaining the offset.
    std::vector<std::vector<Index>> witness;
    /// r*(x) from time 0, +infinity (nullopt) beyond the deadline.
    std::vector<RecoveryTime> r_star;

    /// States at time t that can guarantee recovery by the deadline.
    StateSet resilient(int t) const;
    Strategy witness_strategy(int start = 0) const;
};

struct ResilientSet {
    StateSet states;
    /// witnesses[x] holds a resilient strategy for every member x.
    std::vector<std::optional<Strategy>> witnesses;
    Certificate certificate = Certificate::Exhaustive;
};

/// Builds the bundle over the regime's scenario set and tests membership.
bool check_resilient(const SystemModel& model, const Strategy& strategy, Index x0, int t, const RegimeSpec& regime,
                     std::uint64_t scenario_cap = kDefaultScenarioCap);

/// Requires a product robust set (ConfigurationError for explicit scenario lists).
KernelTable robust_viability_kernel(const SystemModel& model, const StateSet& acceptable);

/// Same recursion over the full uncertainty sets instead of the robust subsets.
KernelTable full_viability_kernel(const SystemModel& model, const StateSet& acceptable);

/// Requires per-time probabilities (independent noise).
ValueTable stochastic_viability_value(const SystemModel& model, const StateSet& acceptable);

RecoveryTable robust_recovery_table(const SystemModel& model, const StateSet& acceptable, int deadline);

/// True when resilient_states answers this regime by dynamic programming.
bool has_dp_route(const SystemModel& model, const RegimeSpec& regime);

/// Exact resilient states at time t. Viability, robust recovery, and
/// stochastic viability are solved by dynamic programming when the model
/// allows it; other regimes by exhaustive search over the strategy class.
ResilientSet resilient_states(const SystemModel& model, int t, const RegimeSpec& regime,
                              StrategyClass strategy_class, const SearchOptions& options = {});

}  // namespace resilience
