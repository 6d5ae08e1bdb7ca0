#include "resilience/optimize.hpp"

#include <limits>
#include <mutex>

namespace resilience {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

bool all_probabilities_positive(const SystemModel& model) {
    for (int t = 0; t < model.horizon(); ++t)
        for (Index w = 0; w < model.num_uncertainties(t); ++w)
            if (!(model.probability(t, w) > 0.0)) return false;
    return true;
}

/// Acceptable set of a viability-family regime eligible for the cost recursion.
const StateSet* dp_acceptable_set(const SystemModel& model, const RegimeSpec& regime) {
    if (!model.has_product_probabilities()) return nullptr;
    if (const auto* v = std::get_if<Viability>(&regime)) return model.robust_is_full() ? &v->acceptable : nullptr;
    if (const auto* s = std::get_if<StochasticViability>(&regime))
        return s->beta == 1.0 && all_probabilities_positive(model) ? &s->acceptable : nullptr;
    return nullptr;
}

double stage_cost(const SystemModel& model, const CostFunction& cost, int s, Index x, std::optional<Index> u) {
    return std::visit(overloaded{
                          [&](const TimeOutsideCost& c) { return c.acceptable.contains(x) ? 0.0 : 1.0; },
                          [&](const ControlEffortCost& c) {
                              if (!u) return 0.0;
                              return c.per_control.empty() ? model.control_coords(*u)[0] : c.per_control.at(*u);
                          },
                          [&](const TerminalCost& c) {
                              if (u) return 0.0;
                              return c.acceptable.contains(x) ? 0.0 : 1.0;
                          },
                          [&](const TabularCost& c) {
                              double v = c.state_cost.at(s).at(x);
                              if (u) v += c.control_cost.at(s).at(*u);
                              return v;
                          },
                          [](const RecoveryTimeCost&) -> double { throw std::logic_error("not additive"); },
                      },
                      cost.kind);
}

OptimizationResult minimize_by_dp(const SystemModel& model, Index x0, int t, const StateSet& acceptable,
                                  const CostFunction& cost) {
    const int K = model.horizon();
    const std::size_t nx = model.num_states();
    const Index cemetery = model.cemetery();
    const KernelTable kernel = full_viability_kernel(model, acceptable);

    OptimizationResult result;
    result.certificate = Certificate::DynamicProgramming;
    result.strategy_class = StrategyClass::Markovian;
    if (!kernel.members[t].contains(x0)) {
        result.value = kInfinity;
        return result;
    }

    std::vector<double> next(nx);
    for (Index x = 0; x < nx; ++x) next[x] = stage_cost(model, cost, K, x, std::nullopt);
    std::vector<std::vector<Index>> tables(static_cast<std::size_t>(K), std::vector<Index>(nx, 0));
    for (int s = 0; s < K; ++s)
        for (Index x = 0; x < nx; ++x) tables[s][x] = model.allowed_controls(s, x).front();

    for (int s = K - 1; s >= t; --s) {
        const double cemetery_next = cost.cemetery_penalty * static_cast<double>(K - s);
        std::vector<double> current(nx);
        for (Index x = 0; x < nx; ++x) {
            const bool in_kernel = kernel.members[s].contains(x);
            double best = kInfinity;
            bool have = false;
            for (Index u : model.allowed_controls(s, x)) {
                double expected = 0.0;
                bool preserves = true;
                for (Index w = 0; w < model.num_uncertainties(s); ++w) {
                    const Index y = model.transition(s, x, u, w);
                    if (in_kernel && !kernel.members[s + 1].contains(y)) preserves = false;
                    expected += model.probability(s, w) * (y == cemetery ? cemetery_next : next[y]);
                }
                if (!preserves) continue;
                const double v = stage_cost(model, cost, s, x, u) + expected;
                if (!have || v < best) {
                    best = v;
                    tables[s][x] = u;
                    have = true;
                }
            }
            current[x] = best;
        }
        next = std::move(current);
    }

    std::vector<Policy> policies;
    for (int s = 0; s < K; ++s) policies.push_back(Policy::markovian(s, tables[s]));
    result.resilient = true;
    result.value = next[x0];
    result.strategy = Strategy(std::move(policies), t);
    return result;
}

OptimizationResult minimize_exhaustive(const SystemModel& model, Index x0, int t, const RegimeSpec& regime,
                                       const RiskMeasureSpec& risk, StrategyClass strategy_class,
                                       const OptimizeOptions& options) {
    const Domain regime_domain = required_domain(regime);
    const Domain risk_domain = required_domain(risk);
    const auto regime_scenarios = enumerate_scenarios(model, regime_domain == Domain::Robust, options.scenario_cap);
    const auto risk_scenarios = enumerate_scenarios(model, risk_domain == Domain::Robust, options.scenario_cap);
    const StrategyEnumeration strategies(model, strategy_class, t, options.strategy_cap);

    std::mutex mu;
    double best_value = kInfinity;
    std::uint64_t best_rank = UINT64_MAX;
    std::uint64_t examined = 0;

    parallel_chunks(strategies.size(), options.threads, [&](std::uint64_t begin, std::uint64_t end) {
        double local_value = kInfinity;
        std::uint64_t local_rank = UINT64_MAX;
        std::uint64_t local_examined = 0;
        strategies.for_each(begin, end, [&](std::uint64_t rank, const Strategy& strategy) {
            const auto bundle = build_bundle(model, strategy, x0, t, regime_domain, regime_scenarios);
            if (!regime_membership(model, regime, bundle)) return true;
            ++local_examined;
            const double value =
                risk_domain == regime_domain
                    ? evaluate_risk(model, risk, bundle)
                    : evaluate_risk(model, risk, build_bundle(model, strategy, x0, t, risk_domain, risk_scenarios));
            if (local_rank == UINT64_MAX || value < local_value) {
                local_value = value;
                local_rank = rank;
            }
            return true;
        });
        std::lock_guard lock(mu);
        examined += local_examined;
        if (local_rank == UINT64_MAX) return;
        if (best_rank == UINT64_MAX || local_value < best_value ||
            (local_value == best_value && local_rank < best_rank)) {
            best_value = local_value;
            best_rank = local_rank;
        }
    });

    OptimizationResult result;
    result.certificate = Certificate::Exhaustive;
    result.strategy_class = strategy_class;
    result.examined = examined;
    if (best_rank == UINT64_MAX) {
        result.value = kInfinity;
        return result;
    }
    result.resilient = true;
    result.value = best_value;
    result.strategy = strategies.at(best_rank);
    return result;
}

}  // namespace

bool has_dp_route(const SystemModel& model, const RegimeSpec& regime, const RiskMeasureSpec& risk,
                  StrategyClass strategy_class) {
    if (strategy_class != StrategyClass::Markovian) return false;
    if (!dp_acceptable_set(model, regime)) return false;
    const auto* composed = std::get_if<ComposedRisk>(&risk);
    return composed && composed->cost.is_additive() && composed->outer.kind == OuterFunctional::Kind::Expectation;
}

OptimizationResult minimize_risk(const SystemModel& model, Index x0, int t, const RegimeSpec& regime,
                                 const RiskMeasureSpec& risk, StrategyClass strategy_class,
                                 const OptimizeOptions& options) {
    if (t < 0 || t > model.horizon()) throw InputError("time out of range");
    if (x0 >= model.num_states()) throw InputError("initial state out of range");
    validate(model, regime);
    validate(model, risk);
    if (options.allow_dp && has_dp_route(model, regime, risk, strategy_class)) {
        const auto& composed = std::get<ComposedRisk>(risk);
        return minimize_by_dp(model, x0, t, *dp_acceptable_set(model, regime), composed.cost);
    }
    return minimize_exhaustive(model, x0, t, regime, risk, strategy_class, options);
}

double resilience_indicator(const SystemModel& model, Index x0, const RegimeSpec& regime, const RiskMeasureSpec& risk,
                            StrategyClass strategy_class, const OptimizeOptions& options, int t) {
    return minimize_risk(model, x0, t, regime, risk, strategy_class, options).value;
}

}  // namespace resilience
