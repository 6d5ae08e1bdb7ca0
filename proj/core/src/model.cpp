#include "resilience/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace resilience {

IndexSet::IndexSet(std::size_t universe, std::initializer_list<Index> members) : mask_(universe, 0) {
    for (Index i : members) insert(i);
}

IndexSet IndexSet::from(std::size_t universe, std::span<const Index> members) {
    IndexSet set(universe);
    for (Index i : members) set.insert(i);
    return set;
}

IndexSet IndexSet::all(std::size_t universe) {
    IndexSet set(universe);
    std::fill(set.mask_.begin(), set.mask_.end(), 1);
    return set;
}

void IndexSet::insert(Index i) {
    if (i >= mask_.size())
        throw InputError("index " + std::to_string(i) + " outside set universe of size " +
                         std::to_string(mask_.size()));
    mask_[i] = 1;
}

void IndexSet::erase(Index i) {
    if (i < mask_.size()) mask_[i] = 0;
}

std::size_t IndexSet::size() const noexcept {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

std::vector<Index> IndexSet::members() const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i]) out.push_back(static_cast<Index>(i));
    return out;
}

bool IndexSet::is_subset_of(const IndexSet& other) const noexcept {
    for (std::size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i] && !other.contains(static_cast<Index>(i))) return false;
    return true;
}

void ModelDefinition::allocate() {
    const std::size_t nx = states.size();
    const std::size_t nu = controls.size();
    dynamics.assign(static_cast<std::size_t>(horizon), {});
    allowed.assign(static_cast<std::size_t>(horizon), std::vector<char>(nx * nu, 1));
    for (int t = 0; t < horizon; ++t) {
        const std::size_t nw = t < static_cast<int>(uncertainty.size()) ? uncertainty[t].size() : 0;
        dynamics[t].assign(nx * nu * nw, kUnset);
    }
}

void ModelDefinition::set_next(int t, Index x, Index u, Index w, Index next) {
    const std::size_t nu = controls.size();
    const std::size_t nw = uncertainty.at(t).size();
    if (x >= states.size() || u >= nu || w >= nw)
        throw InputError("transition index out of range");
    dynamics.at(t).at((static_cast<std::size_t>(x) * nu + u) * nw + w) = next;
}

void ModelDefinition::set_allowed(int t, Index x, std::span<const Index> controls_allowed) {
    const std::size_t nu = controls.size();
    auto& row = allowed.at(t);
    for (std::size_t u = 0; u < nu; ++u) row.at(x * nu + u) = 0;
    for (Index u : controls_allowed) {
        if (u >= nu) throw InputError("constraint control index out of range");
        row[x * nu + u] = 1;
    }
}

namespace {

void check_points(const std::vector<LabeledPoint>& points, const char* what) {
    if (points.empty()) throw InputError(std::string(what) + " space is empty");
    std::set<std::string> seen;
    const std::size_t dim = points.front().coords.size();
    for (const auto& p : points) {
        if (p.label.empty() || p.label == kCemeteryLabel)
            throw InputError(std::string("invalid ") + what + " label '" + p.label + "'");
        if (!seen.insert(p.label).second)
            throw InputError(std::string("duplicate ") + what + " label '" + p.label + "'");
        if (p.coords.empty())
            throw InputError(std::string(what) + " '" + p.label + "' needs at least one coordinate");
        if (p.coords.size() != dim)
            throw InputError(std::string(what) + " '" + p.label + "' has coordinate dimension " +
                             std::to_string(p.coords.size()) + ", expected " + std::to_string(dim));
    }
}

std::string format_sum(double s) {
    std::ostringstream os;
    os.precision(17);
    os << s;
    return os.str();
}

}  // namespace

SystemModel::SystemModel(ModelDefinition definition) : def_(std::move(definition)) {
    const int K = def_.horizon;
    if (K < 1) throw InputError("horizon must be at least 1");
    check_points(def_.states, "state");
    check_points(def_.controls, "control");
    const std::size_t nx = num_states();
    const std::size_t nu = num_controls();

    if (def_.uncertainty.size() != static_cast<std::size_t>(K))
        throw InputError("uncertainty sets declared for " + std::to_string(def_.uncertainty.size()) +
                         " times, expected " + std::to_string(K));
    for (int t = 0; t < K; ++t) {
        const auto& w = def_.uncertainty[t];
        if (w.empty()) throw InputError("uncertainty set at time " + std::to_string(t) + " is empty");
        std::set<std::string> seen(w.begin(), w.end());
        if (seen.size() != w.size())
            throw InputError("duplicate uncertainty label at time " + std::to_string(t));
    }

    if (!def_.probabilities.empty()) {
        if (def_.probabilities.size() != static_cast<std::size_t>(K))
            throw InputError("probabilities declared for " + std::to_string(def_.probabilities.size()) +
                             " times, expected " + std::to_string(K));
        for (int t = 0; t < K; ++t) {
            const auto& p = def_.probabilities[t];
            if (p.size() != num_uncertainties(t))
                throw InputError("probability vector at time " + std::to_string(t) + " has " +
                                 std::to_string(p.size()) + " entries, expected " +
                                 std::to_string(num_uncertainties(t)));
            for (double v : p)
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw InputError("negative or non-finite probability at time " + std::to_string(t));
            const double s = std::accumulate(p.begin(), p.end(), 0.0);
            if (std::abs(s - 1.0) > kProbabilitySumTolerance)
                throw InputError("probabilities sum to " + format_sum(s) + " \xe2\x89\xa0 1 at time " +
                                 std::to_string(t));
        }
    }

    auto check_scenario = [&](const Scenario& s, const char* what) {
        if (s.size() != static_cast<std::size_t>(K))
            throw InputError(std::string(what) + " scenario has length " + std::to_string(s.size()) +
                             ", expected " + std::to_string(K));
        for (int t = 0; t < K; ++t)
            if (s[t] >= num_uncertainties(t))
                throw InputError(std::string(what) + " scenario index out of range at time " +
                                 std::to_string(t));
    };

    if (!def_.joint.empty()) {
        if (!def_.probabilities.empty())
            throw InputError("declare either per-time probabilities or a joint distribution, not both");
        double s = 0.0;
        for (const auto& [scenario, p] : def_.joint) {
            check_scenario(scenario, "joint");
            if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("negative or non-finite joint probability");
            if (!joint_.emplace(scenario, p).second) throw InputError("duplicate joint scenario");
            s += p;
        }
        if (std::abs(s - 1.0) > kProbabilitySumTolerance)
            throw InputError("probabilities sum to " + format_sum(s) + " \xe2\x89\xa0 1 in joint distribution");
        std::sort(def_.joint.begin(), def_.joint.end());
    }

    robust_sets_.assign(K, {});
    if (!def_.robust.empty() && def_.robust.size() != static_cast<std::size_t>(K))
        throw InputError("robust subsets declared for " + std::to_string(def_.robust.size()) +
                         " times, expected " + std::to_string(K));
    for (int t = 0; t < K; ++t) {
        std::vector<Index> subset;
        if (def_.robust.empty()) {
            subset.resize(num_uncertainties(t));
            std::iota(subset.begin(), subset.end(), Index{0});
        } else {
            subset = def_.robust[t];
            std::sort(subset.begin(), subset.end());
            subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
            if (subset.empty())
                throw InputError("robust subset at time " + std::to_string(t) + " is empty");
            if (subset.back() >= num_uncertainties(t))
                throw InputError("robust subset index out of range at time " + std::to_string(t));
            def_.robust[t] = subset;
        }
        if (subset.size() != num_uncertainties(t)) robust_is_full_ = false;
        robust_sets_[t] = std::move(subset);
    }
    if (!def_.robust_scenarios.empty()) {
        for (const auto& s : def_.robust_scenarios) check_scenario(s, "robust");
        std::sort(def_.robust_scenarios.begin(), def_.robust_scenarios.end());
        def_.robust_scenarios.erase(std::unique(def_.robust_scenarios.begin(), def_.robust_scenarios.end()),
                                    def_.robust_scenarios.end());
        robust_is_full_ = def_.robust_scenarios.size() == scenario_count(*this, false);
    }

    if (def_.dynamics.size() != static_cast<std::size_t>(K))
        throw InputError("dynamics declared for " + std::to_string(def_.dynamics.size()) +
                         " times, expected " + std::to_string(K));
    for (int t = 0; t < K; ++t) {
        const std::size_t nw = num_uncertainties(t);
        if (def_.dynamics[t].size() != nx * nu * nw)
            throw InputError("dynamics table at time " + std::to_string(t) + " has wrong size");
        for (Index x = 0; x < nx; ++x)
            for (Index u = 0; u < nu; ++u)
                for (Index w = 0; w < nw; ++w) {
                    const Index next = transition(t, x, u, w);
                    if (next == ModelDefinition::kUnset)
                        throw InputError("dynamics not total at (" + std::to_string(t) + "," +
                                         state_label(x) + "," + control_label(u) + "," +
                                         uncertainty_label(t, w) + ")");
                    if (next > nx)
                        throw InputError("dynamics image out of range at (" + std::to_string(t) + "," +
                                         state_label(x) + "," + control_label(u) + "," +
                                         uncertainty_label(t, w) + ")");
                }
    }

    if (def_.allowed.size() != static_cast<std::size_t>(K))
        throw InputError("constraints declared for wrong number of times");
    allowed_lists_.assign(static_cast<std::size_t>(K) * nx, {});
    for (int t = 0; t < K; ++t) {
        if (def_.allowed[t].size() != nx * nu)
            throw InputError("constraint table at time " + std::to_string(t) + " has wrong size");
        for (Index x = 0; x < nx; ++x) {
            auto& list = allowed_lists_[static_cast<std::size_t>(t) * nx + x];
            for (Index u = 0; u < nu; ++u)
                if (allowed(t, x, u)) list.push_back(u);
            if (list.empty())
                throw InputError("constraint set empty at (" + std::to_string(t) + "," + state_label(x) + ")");
        }
    }
}

const std::string& SystemModel::state_label(Index x) const {
    static const std::string cemetery_label = kCemeteryLabel;
    if (x == cemetery()) return cemetery_label;
    return def_.states.at(x).label;
}

std::optional<Index> SystemModel::find_state(const std::string& label) const {
    if (label == kCemeteryLabel) return cemetery();
    for (std::size_t i = 0; i < def_.states.size(); ++i)
        if (def_.states[i].label == label) return static_cast<Index>(i);
    return std::nullopt;
}

std::optional<Index> SystemModel::find_control(const std::string& label) const {
    for (std::size_t i = 0; i < def_.controls.size(); ++i)
        if (def_.controls[i].label == label) return static_cast<Index>(i);
    return std::nullopt;
}

std::optional<Index> SystemModel::find_uncertainty(int t, const std::string& label) const {
    const auto& w = def_.uncertainty.at(t);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] == label) return static_cast<Index>(i);
    return std::nullopt;
}

void SystemModel::validate_index(int t, Index x, Index u, Index w) const {
    if (t < 0 || t >= horizon()) throw InputError("time " + std::to_string(t) + " outside 0.." + std::to_string(horizon() - 1));
    if (x > cemetery()) throw InputError("state index " + std::to_string(x) + " out of range");
    if (u >= num_controls()) throw InputError("control index " + std::to_string(u) + " out of range");
    if (w >= num_uncertainties(t)) throw InputError("uncertainty index " + std::to_string(w) + " out of range");
}

Index SystemModel::step(int t, Index x, Index u, Index w) const {
    validate_index(t, x, u, w);
    if (x == cemetery() || !allowed(t, x, u)) return cemetery();
    return transition(t, x, u, w);
}

double SystemModel::scenario_weight(const Scenario& scenario) const {
    if (!joint_.empty()) {
        auto it = joint_.find(scenario);
        return it == joint_.end() ? 0.0 : it->second;
    }
    if (def_.probabilities.empty()) throw ConfigurationError("model declares no probabilities");
    if (scenario.size() != static_cast<std::size_t>(horizon())) throw InputError("scenario length mismatch");
    double w = 1.0;
    for (int t = 0; t < horizon(); ++t) w *= def_.probabilities[t].at(scenario[t]);
    return w;
}

std::vector<Index> flow(const SystemModel& model, int start, Index x,
                        std::span<const Index> controls, std::span<const Index> scenario) {
    const int end = start + static_cast<int>(controls.size());
    if (start < 0 || end > model.horizon())
        throw InputError("flow segment " + std::to_string(start) + ":" + std::to_string(end) +
                         " outside 0:" + std::to_string(model.horizon()));
    if (static_cast<int>(scenario.size()) < end)
        throw InputError("scenario of length " + std::to_string(scenario.size()) +
                         " does not cover times up to " + std::to_string(end - 1));
    if (x > model.cemetery()) throw InputError("state index out of range");
    std::vector<Index> path;
    path.reserve(controls.size() + 1);
    path.push_back(x);
    for (int s = start; s < end; ++s) {
        x = model.step(s, x, controls[s - start], scenario[s]);
        path.push_back(x);
    }
    return path;
}

std::uint64_t scenario_count(const SystemModel& model, bool robust_only) {
    if (robust_only && model.has_robust_scenario_list()) return model.robust_scenario_list().size();
    std::uint64_t n = 1;
    for (int t = 0; t < model.horizon(); ++t)
        n = saturating_mul(n, robust_only ? model.robust_subset(t).size() : model.num_uncertainties(t));
    return n;
}

std::vector<Scenario> enumerate_scenarios(const SystemModel& model, bool robust_only, std::uint64_t cap) {
    const std::uint64_t n = scenario_count(model, robust_only);
    if (n > cap) throw CapacityError(robust_only ? "robust scenarios" : "scenarios", n, cap);
    if (robust_only && model.has_robust_scenario_list()) return model.robust_scenario_list();

    const int K = model.horizon();
    std::vector<std::vector<Index>> choices(K);
    for (int t = 0; t < K; ++t) {
        if (robust_only) {
            auto sub = model.robust_subset(t);
            choices[t].assign(sub.begin(), sub.end());
        } else {
            choices[t].resize(model.num_uncertainties(t));
            std::iota(choices[t].begin(), choices[t].end(), Index{0});
        }
    }
    std::vector<Scenario> out;
    out.reserve(static_cast<std::size_t>(n));
    std::vector<std::size_t> digit(K, 0);
    for (std::uint64_t k = 0; k < n; ++k) {
        Scenario s(K);
        for (int t = 0; t < K; ++t) s[t] = choices[t][digit[t]];
        out.push_back(std::move(s));
        for (int t = K - 1; t >= 0; --t) {
            if (++digit[t] < choices[t].size()) break;
            digit[t] = 0;
        }
    }
    return out;
}

}  // namespace resilience
