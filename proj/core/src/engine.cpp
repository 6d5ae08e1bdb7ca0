#include "resilience/engine.hpp"

#include <atomic>
#include <climits>

namespace resilience {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

Strategy markovian_from_tables(const std::vector<std::vector<Index>>& tables, int start) {
    std::vector<Policy> policies;
    policies.reserve(tables.size());
    for (std::size_t t = 0; t < tables.size(); ++t) policies.push_back(Policy::markovian(static_cast<int>(t), tables[t]));
    return Strategy(std::move(policies), start);
}

void check_acceptable(const SystemModel& model, const StateSet& acceptable) {
    if (acceptable.universe() != model.num_states())
        throw InputError("acceptable set universe does not match the model");
}

bool all_successors_in(const SystemModel& model, int t, Index x, Index u, std::span<const Index> noise,
                       const StateSet& target) {
    for (Index w : noise)
        if (!target.contains(model.transition(t, x, u, w))) return false;
    return true;
}

KernelTable viability_kernel(const SystemModel& model, const StateSet& acceptable, bool robust_only) {
    check_acceptable(model, acceptable);
    const int K = model.horizon();
    const std::size_t nx = model.num_states();
    KernelTable table;
    table.members.assign(static_cast<std::size_t>(K) + 1, StateSet(nx));
    table.witness.assign(static_cast<std::size_t>(K), std::vector<Index>(nx, 0));
    table.members[K] = acceptable;
    for (int t = K - 1; t >= 0; --t) {
        std::vector<Index> all_noise(model.num_uncertainties(t));
        for (Index w = 0; w < all_noise.size(); ++w) all_noise[w] = w;
        const std::span<const Index> noise = robust_only ? model.robust_subset(t) : std::span<const Index>(all_noise);
        for (Index x = 0; x < nx; ++x) {
            const auto controls = model.allowed_controls(t, x);
            table.witness[t][x] = controls.front();
            if (!acceptable.contains(x)) continue;
            for (Index u : controls) {
                if (all_successors_in(model, t, x, u, noise, table.members[t + 1])) {
                    table.members[t].insert(x);
                    table.witness[t][x] = u;
                    break;
                }
            }
        }
    }
    return table;
}

void require_product_robust_set(const SystemModel& model) {
    if (model.has_robust_scenario_list() && !model.robust_is_full())
        throw ConfigurationError(
            "dynamic programming needs a per-time robust set; the model lists robust scenarios explicitly");
}

ResilientSet exhaustive(const SystemModel& model, int t, const RegimeSpec& regime, StrategyClass strategy_class,
                        const SearchOptions& options) {
    const Domain domain = required_domain(regime);
    const auto scenarios = enumerate_scenarios(model, domain == Domain::Robust, options.scenario_cap);
    std::optional<StrategyEnumeration> maybe;
    try {
        maybe.emplace(model, strategy_class, t, options.strategy_cap);
    } catch (const CapacityError& e) {
        throw CapacityError(std::string(to_string(strategy_class)) + " strategies for regime " + regime_name(regime) +
                                " (viability, robust_recovery, and stochastic_viability are solved by dynamic "
                                "programming)",
                            e.required(), e.cap());
    }
    const StrategyEnumeration& strategies = *maybe;
    const std::size_t nx = model.num_states();
    std::vector<std::atomic<std::uint64_t>> best(nx);
    for (auto& b : best) b.store(UINT64_MAX);

    parallel_chunks(strategies.size(), options.threads, [&](std::uint64_t begin, std::uint64_t end) {
        strategies.for_each(begin, end, [&](std::uint64_t rank, const Strategy& strategy) {
            bool pending = false;
            for (Index x0 = 0; x0 < nx; ++x0) {
                if (best[x0].load() < rank) continue;
                const auto bundle = build_bundle(model, strategy, x0, t, domain, scenarios);
                if (regime_membership(model, regime, bundle)) {
                    std::uint64_t cur = best[x0].load();
                    while (rank < cur && !best[x0].compare_exchange_weak(cur, rank)) {
                    }
                } else {
                    pending = true;
                }
            }
            return pending;
        });
    });

    ResilientSet out{StateSet(nx), std::vector<std::optional<Strategy>>(nx), Certificate::Exhaustive};
    for (Index x = 0; x < nx; ++x) {
        const std::uint64_t rank = best[x].load();
        if (rank == UINT64_MAX) continue;
        out.states.insert(x);
        out.witnesses[x] = strategies.at(rank);
    }
    return out;
}

}  // namespace

const char* to_string(Certificate c) noexcept {
    return c == Certificate::Exhaustive ? "exhaustive" : "dp";
}

Strategy KernelTable::witness_strategy(int start) const { return markovian_from_tables(witness, start); }

StateSet ValueTable::resilient(int t, double beta) const {
    const auto& row = value.at(t);
    StateSet out(row.size());
    for (Index x = 0; x < row.size(); ++x)
        if (row[x] >= beta - kComparisonTolerance) out.insert(x);
    return out;
}

Strategy ValueTable::witness_strategy(int start) const { return markovian_from_tables(witness, start); }

StateSet RecoveryTable::resilient(int t) const {
    const auto& row = offset.at(t);
    StateSet out(row.size());
    for (Index x = 0; x < row.size(); ++x)
        if (row[x] && t + *row[x] <= deadline) out.insert(x);
    return out;
}

Strategy RecoveryTable::witness_strategy(int start) const { return markovian_from_tables(witness, start); }

bool check_resilient(const SystemModel& model, const Strategy& strategy, Index x0, int t, const RegimeSpec& regime,
                     std::uint64_t scenario_cap) {
    validate(model, regime);
    strategy.check_shape(model);
    const bool robust_only = required_domain(regime) == Domain::Robust;
    const auto bundle = build_bundle(model, strategy.with_start(t), x0, t, robust_only, scenario_cap);
    return regime_membership(model, regime, bundle);
}

KernelTable robust_viability_kernel(const SystemModel& model, const StateSet& acceptable) {
    require_product_robust_set(model);
    return viability_kernel(model, acceptable, true);
}

KernelTable full_viability_kernel(const SystemModel& model, const StateSet& acceptable) {
    return viability_kernel(model, acceptable, false);
}

ValueTable stochastic_viability_value(const SystemModel& model, const StateSet& acceptable) {
    check_acceptable(model, acceptable);
    if (!model.has_product_probabilities())
        throw ConfigurationError("stochastic viability dynamic programming requires per-time probabilities");
    const int K = model.horizon();
    const std::size_t nx = model.num_states();
    const Index cemetery = model.cemetery();
    ValueTable table;
    table.value.assign(static_cast<std::size_t>(K) + 1, std::vector<double>(nx, 0.0));
    table.witness.assign(static_cast<std::size_t>(K), std::vector<Index>(nx, 0));
    for (Index x = 0; x < nx; ++x) table.value[K][x] = acceptable.contains(x) ? 1.0 : 0.0;
    for (int t = K - 1; t >= 0; --t) {
        const auto& next = table.value[t + 1];
        for (Index x = 0; x < nx; ++x) {
            const auto controls = model.allowed_controls(t, x);
            table.witness[t][x] = controls.front();
            if (!acceptable.contains(x)) continue;
            double best = -1.0;
            for (Index u : controls) {
                double v = 0.0;
                for (Index w = 0; w < model.num_uncertainties(t); ++w) {
                    const Index y = model.transition(t, x, u, w);
                    if (y != cemetery) v += model.probability(t, w) * next[y];
                }
                if (v > best) {
                    best = v;
                    table.witness[t][x] = u;
                }
            }
            table.value[t][x] = best;
        }
    }
    return table;
}

RecoveryTable robust_recovery_table(const SystemModel& model, const StateSet& acceptable, int deadline) {
    const int K = model.horizon();
    if (deadline < 0 || deadline > K)
        throw InputError("deadline " + std::to_string(deadline) + " outside 0.." + std::to_string(K));
    const KernelTable kernel = robust_viability_kernel(model, acceptable);
    const std::size_t nx = model.num_states();
    const Index cemetery = model.cemetery();

    RecoveryTable table;
    table.deadline = deadline;
    table.offset.assign(static_cast<std::size_t>(K) + 1, std::vector<std::optional<int>>(nx));
    table.witness = kernel.witness;
    for (Index x = 0; x < nx; ++x)
        if (acceptable.contains(x)) table.offset[K][x] = 0;
    for (int t = K - 1; t >= 0; --t) {
        const auto noise = model.robust_subset(t);
        for (Index x = 0; x < nx; ++x) {
            if (kernel.members[t].contains(x)) {
                table.offset[t][x] = 0;
                continue;
            }
            int best = INT_MAX;
            for (Index u : model.allowed_controls(t, x)) {
                int worst = 0;
                for (Index w : noise) {
                    const Index y = model.transition(t, x, u, w);
                    const auto& k = y == cemetery ? std::optional<int>{} : table.offset[t + 1][y];
                    if (!k) {
                        worst = INT_MAX;
                        break;
                    }
                    worst = std::max(worst, *k);
                }
                if (worst != INT_MAX && worst + 1 < best) {
                    best = worst + 1;
                    table.witness[t][x] = u;
                }
            }
            if (best != INT_MAX) table.offset[t][x] = best;
        }
    }
    table.r_star.assign(nx, std::nullopt);
    for (Index x = 0; x < nx; ++x)
        if (table.offset[0][x] && *table.offset[0][x] <= deadline) table.r_star[x] = table.offset[0][x];
    return table;
}

bool has_dp_route(const SystemModel& model, const RegimeSpec& regime) {
    const bool product_robust = !model.has_robust_scenario_list() || model.robust_is_full();
    return std::visit(overloaded{
                          [&](const Viability&) { return product_robust; },
                          [&](const RobustRecovery&) { return product_robust; },
                          [&](const StochasticViability&) { return model.has_product_probabilities(); },
                          [](const auto&) { return false; },
                      },
                      regime);
}

ResilientSet resilient_states(const SystemModel& model, int t, const RegimeSpec& regime, StrategyClass strategy_class,
                              const SearchOptions& options) {
    if (t < 0 || t > model.horizon()) throw InputError("time out of range");
    validate(model, regime);
    if (!has_dp_route(model, regime)) return exhaustive(model, t, regime, strategy_class, options);

    const std::size_t nx = model.num_states();
    ResilientSet out{StateSet(nx), std::vector<std::optional<Strategy>>(nx), Certificate::DynamicProgramming};
    Strategy witness = std::visit(overloaded{
                                      [&](const Viability& r) {
                                          const auto k = robust_viability_kernel(model, r.acceptable);
                                          out.states = k.members[t];
                                          return k.witness_strategy(t);
                                      },
                                      [&](const RobustRecovery& r) {
                                          const auto table = robust_recovery_table(model, r.acceptable, r.deadline);
                                          out.states = table.resilient(t);
                                          return table.witness_strategy(t);
                                      },
                                      [&](const StochasticViability& r) {
                                          const auto v = stochastic_viability_value(model, r.acceptable);
                                          out.states = v.resilient(t, r.beta);
                                          return v.witness_strategy(t);
                                      },
                                      [](const auto&) -> Strategy { throw std::logic_error("no dp route"); },
                                  },
                                  regime);
    for (Index x : out.states.members()) out.witnesses[x] = witness;
    return out;
}

}  // namespace resilience
