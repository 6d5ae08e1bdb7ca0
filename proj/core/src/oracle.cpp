#include "resilience/oracle.hpp"

#include <atomic>
#include <climits>
#include <limits>
#include <mutex>

namespace resilience::oracle {

namespace {

bool robust(Domain d) { return d == Domain::Robust; }

std::vector<Scenario> scenarios_for(const SystemModel& model, Domain domain, const SearchOptions& options) {
    return enumerate_scenarios(model, robust(domain), options.scenario_cap);
}

void check_start(const SystemModel& model, int t) {
    if (t < 0 || t > model.horizon()) throw InputError("time out of range");
}

void check_state(const SystemModel& model, Index x0) {
    if (x0 >= model.num_states()) throw InputError("initial state out of range");
}

}  // namespace

StateSet resilient_states(const SystemModel& model, int t, const RegimeSpec& regime, StrategyClass strategy_class,
                          const SearchOptions& options) {
    check_start(model, t);
    validate(model, regime);
    const Domain domain = required_domain(regime);
    const auto scenarios = scenarios_for(model, domain, options);
    const StrategyEnumeration strategies(model, strategy_class, t, options.strategy_cap);
    const std::size_t nx = model.num_states();

    std::vector<std::atomic<bool>> found(nx);
    std::atomic<std::size_t> remaining{nx};

    parallel_chunks(strategies.size(), options.threads, [&](std::uint64_t begin, std::uint64_t end) {
        strategies.for_each(begin, end, [&](std::uint64_t, const Strategy& strategy) {
            for (Index x0 = 0; x0 < nx; ++x0) {
                if (found[x0].load(std::memory_order_relaxed)) continue;
                const auto bundle = build_bundle(model, strategy, x0, t, domain, scenarios);
                if (regime_membership(model, regime, bundle) && !found[x0].exchange(true)) --remaining;
            }
            return remaining.load() > 0;
        });
    });

    StateSet out(nx);
    for (Index x = 0; x < nx; ++x)
        if (found[x].load()) out.insert(x);
    return out;
}

double min_risk(const SystemModel& model, Index x0, int t, const RegimeSpec& regime, const RiskMeasureSpec& risk,
                StrategyClass strategy_class, const SearchOptions& options) {
    check_start(model, t);
    check_state(model, x0);
    validate(model, regime);
    validate(model, risk);
    const Domain regime_domain = required_domain(regime);
    const Domain risk_domain = required_domain(risk);
    const auto regime_scenarios = scenarios_for(model, regime_domain, options);
    const auto risk_scenarios = scenarios_for(model, risk_domain, options);
    const StrategyEnumeration strategies(model, strategy_class, t, options.strategy_cap);

    std::mutex mu;
    double best = std::numeric_limits<double>::infinity();
    parallel_chunks(strategies.size(), options.threads, [&](std::uint64_t begin, std::uint64_t end) {
        double local = std::numeric_limits<double>::infinity();
        strategies.for_each(begin, end, [&](std::uint64_t, const Strategy& strategy) {
            const auto bundle = build_bundle(model, strategy, x0, t, regime_domain, regime_scenarios);
            if (!regime_membership(model, regime, bundle)) return true;
            const double value =
                risk_domain == regime_domain
                    ? evaluate_risk(model, risk, bundle)
                    : evaluate_risk(model, risk, build_bundle(model, strategy, x0, t, risk_domain, risk_scenarios));
            if (value < local) local = value;
            return true;
        });
        std::lock_guard lock(mu);
        if (local < best) best = local;
    });
    return best;
}

double max_viability_probability(const SystemModel& model, Index x0, int t, const StateSet& acceptable,
                                 StrategyClass strategy_class, const SearchOptions& options) {
    check_start(model, t);
    check_state(model, x0);
    if (!model.has_probabilities()) throw ConfigurationError("viability probability requires probabilities");
    const auto scenarios = scenarios_for(model, Domain::Full, options);
    std::vector<double> weights;
    weights.reserve(scenarios.size());
    for (const auto& s : scenarios) weights.push_back(model.scenario_weight(s));
    const StrategyEnumeration strategies(model, strategy_class, t, options.strategy_cap);

    std::mutex mu;
    double best = 0.0;
    parallel_chunks(strategies.size(), options.threads, [&](std::uint64_t begin, std::uint64_t end) {
        double local = 0.0;
        strategies.for_each(begin, end, [&](std::uint64_t, const Strategy& strategy) {
            double p = 0.0;
            for (std::size_t i = 0; i < scenarios.size(); ++i) {
                const auto traj = simulate_closed_loop(model, strategy, x0, scenarios[i], t);
                if (exit_times(model, traj, acceptable, true).empty()) p += weights[i];
            }
            if (p > local) local = p;
            return true;
        });
        std::lock_guard lock(mu);
        if (local > best) best = local;
    });
    return best;
}

RecoveryTime min_max_recovery_time(const SystemModel& model, Index x0, int t, const StateSet& acceptable,
                                   StrategyClass strategy_class, const SearchOptions& options) {
    check_start(model, t);
    check_state(model, x0);
    const auto scenarios = scenarios_for(model, Domain::Robust, options);
    const StrategyEnumeration strategies(model, strategy_class, t, options.strategy_cap);

    std::atomic<int> best{INT_MAX};
    parallel_chunks(strategies.size(), options.threads, [&](std::uint64_t begin, std::uint64_t end) {
        strategies.for_each(begin, end, [&](std::uint64_t, const Strategy& strategy) {
            int worst = INT_MIN;
            for (const auto& s : scenarios) {
                const RecoveryTime tau = recovery_time(model, simulate_closed_loop(model, strategy, x0, s, t), acceptable);
                worst = std::max(worst, tau ? *tau : INT_MAX);
                if (worst >= best.load()) break;
            }
            int current = best.load();
            while (worst < current && !best.compare_exchange_weak(current, worst)) {
            }
            return best.load() > t;
        });
    });
    const int b = best.load();
    return b == INT_MAX ? RecoveryTime{} : RecoveryTime{b};
}

}  // namespace resilience::oracle
