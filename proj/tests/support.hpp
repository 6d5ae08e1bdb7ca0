#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "resilience/model.hpp"

namespace resilience::testing {

struct M1Options {
    /// Robust subset used at every time; empty means the full set.
    std::vector<Index> robust;
    bool with_probabilities = true;
};

/// Reference fixture: K = 3, X = {0,1,2,3}, U = {0,1}, W_t = {0,1},
/// F(x,u,w) = min(3, max(0, x + u - w)), all controls allowed, p_t(1) = 1/2.
inline ModelDefinition m1_definition(const M1Options& options = {}) {
    ModelDefinition def;
    def.horizon = 3;
    for (int x = 0; x < 4; ++x) def.states.push_back({std::to_string(x), {static_cast<double>(x)}});
    for (int u = 0; u < 2; ++u) def.controls.push_back({std::to_string(u), {static_cast<double>(u)}});
    def.uncertainty.assign(3, {"0", "1"});
    if (options.with_probabilities) def.probabilities.assign(3, {0.5, 0.5});
    if (!options.robust.empty()) def.robust.assign(3, options.robust);
    def.allocate();
    for (int t = 0; t < 3; ++t)
        for (Index x = 0; x < 4; ++x)
            for (Index u = 0; u < 2; ++u)
                for (Index w = 0; w < 2; ++w)
                    def.set_next(t, x, u, w,
                                 static_cast<Index>(std::min(3, std::max(0, static_cast<int>(x + u) - static_cast<int>(w)))));
    return def;
}

inline SystemModel m1(const M1Options& options = {}) { return SystemModel(m1_definition(options)); }

inline StateSet states(std::size_t n, std::initializer_list<Index> members) { return StateSet(n, members); }

struct RandomModelParams {
    int max_states = 5;
    int max_controls = 2;
    int max_noise = 2;
    int max_horizon = 3;
    bool probabilities = false;
    /// Draw a random nonempty robust subset per time.
    bool robust_subsets = false;
    /// Probability that a transition leads to the cemetery.
    double cemetery_rate = 0.05;
    /// Probability that a control is removed from a constraint set.
    double constraint_rate = 0.15;
};

/// Random small model; every constraint set stays nonempty.
inline ModelDefinition random_definition(std::mt19937_64& rng, const RandomModelParams& params) {
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ModelDefinition def;
    def.horizon = uniform(1, params.max_horizon);
    const int nx = uniform(1, params.max_states);
    const int nu = uniform(1, params.max_controls);
    for (int x = 0; x < nx; ++x) def.states.push_back({"s" + std::to_string(x), {static_cast<double>(x)}});
    for (int u = 0; u < nu; ++u) def.controls.push_back({"u" + std::to_string(u), {static_cast<double>(u)}});
    for (int t = 0; t < def.horizon; ++t) {
        const int nw = uniform(1, params.max_noise);
        std::vector<std::string> labels;
        for (int w = 0; w < nw; ++w) labels.push_back("w" + std::to_string(w));
        def.uncertainty.push_back(labels);
        if (params.probabilities) {
            std::vector<double> p(nw);
            double sum = 0.0;
            for (auto& v : p) {
                v = static_cast<double>(uniform(0, 4));
                sum += v;
            }
            if (sum == 0.0) {
                p[0] = 1.0;
                sum = 1.0;
            }
            for (auto& v : p) v /= sum;
            // Last entry absorbs rounding.
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < p.size(); ++i) total += p[i];
            p.back() = 1.0 - total;
            def.probabilities.push_back(p);
        }
        if (params.robust_subsets) {
            std::vector<Index> subset;
            for (int w = 0; w < nw; ++w)
                if (unit(rng) < 0.6) subset.push_back(static_cast<Index>(w));
            if (subset.empty()) subset.push_back(static_cast<Index>(uniform(0, nw - 1)));
            def.robust.push_back(subset);
        }
    }
    def.allocate();
    for (int t = 0; t < def.horizon; ++t)
        for (int x = 0; x < nx; ++x) {
            for (int u = 0; u < nu; ++u)
                for (int w = 0; w < static_cast<int>(def.uncertainty[t].size()); ++w) {
                    const Index next = unit(rng) < params.cemetery_rate ? static_cast<Index>(nx)
                                                                        : static_cast<Index>(uniform(0, nx - 1));
                    def.set_next(t, static_cast<Index>(x), static_cast<Index>(u), static_cast<Index>(w), next);
                }
            std::vector<Index> allowed;
            for (int u = 0; u < nu; ++u)
                if (unit(rng) >= params.constraint_rate) allowed.push_back(static_cast<Index>(u));
            if (allowed.empty()) allowed.push_back(static_cast<Index>(uniform(0, nu - 1)));
            def.set_allowed(t, static_cast<Index>(x), allowed);
        }
    return def;
}

inline StateSet random_subset(std::mt19937_64& rng, std::size_t n, double density = 0.6) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    StateSet s(n);
    for (Index x = 0; x < n; ++x)
        if (unit(rng) < density) s.insert(x);
    return s;
}

}  // namespace resilience::testing
