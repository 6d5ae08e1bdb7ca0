#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "resilience/errors.hpp"

namespace resilience {

using Index = std::uint32_t;

/// Uncertainty indices (w_0, ..., w_{K-1}); entry t indexes W_t.
using Scenario = std::vector<Index>;

/// Tolerance for probability vectors summing to one.
inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Tolerance used when comparing computed probabilities against thresholds.
inline constexpr double kComparisonTolerance = 1e-12;

inline constexpr std::uint64_t kDefaultScenarioCap = std::uint64_t{1} << 20;

inline constexpr const char* kCemeteryLabel = "@cemetery";

/// Subset of a finite index universe. Indices outside the universe (the
/// cemetery in particular) are never members.
class IndexSet {
public:
    IndexSet() = default;
    explicit IndexSet(std::size_t universe) : mask_(universe, 0) {}
    IndexSet(std::size_t universe, std::initializer_list<Index> members);

    static IndexSet from(std::size_t universe, std::span<const Index> members);
    static IndexSet all(std::size_t universe);

    bool contains(Index i) const noexcept { return i < mask_.size() && mask_[i] != 0; }
    void insert(Index i);
    void erase(Index i);

    std::size_t universe() const noexcept { return mask_.size(); }
    std::size_t size() const noexcept;
    bool empty() const noexcept { return size() == 0; }
    std::vector<Index> members() const;
    bool is_subset_of(const IndexSet& other) const noexcept;

    bool operator==(const IndexSet&) const = default;

private:
    std::vector<char> mask_;
};

using StateSet = IndexSet;
using ControlSet = IndexSet;

struct LabeledPoint {
    std::string label;
    std::vector<double> coords;

    bool operator==(const LabeledPoint&) const = default;
};

/// Raw, unvalidated description of a finite controlled system. Fill the
/// spaces, call allocate(), then set transitions and constraints.
struct ModelDefinition {
    static constexpr Index kUnset = 0xffffffffu;

    int horizon = 1;
    std::vector<LabeledPoint> states;
    std::vector<LabeledPoint> controls;
    /// Labels of W_t for t = 0..K-1.
    std::vector<std::vector<std::string>> uncertainty;
    /// Empty, or one probability vector per time.
    std::vector<std::vector<double>> probabilities;
    /// Empty, or one robust subset of W_t per time.
    std::vector<std::vector<Index>> robust;
    /// Explicit robust scenario list; takes precedence over `robust`.
    std::vector<Scenario> robust_scenarios;
    /// Explicit joint distribution over scenarios (unlisted scenarios weigh 0).
    std::vector<std::pair<Scenario, double>> joint;
    /// dynamics[t][(x * |U| + u) * |W_t| + w] is the successor; the cemetery
    /// index equals states.size().
    std::vector<std::vector<Index>> dynamics;
    /// allowed[t][x * |U| + u] != 0 iff u is in the constraint set at (t, x).
    std::vector<std::vector<char>> allowed;

    /// Sizes the dynamics (all kUnset) and constraint (all allowed) tables.
    void allocate();
    void set_next(int t, Index x, Index u, Index w, Index next);
    void set_allowed(int t, Index x, std::span<const Index> controls_allowed);

    bool operator==(const ModelDefinition&) const = default;
};

/// Validated finite discrete-time controlled system. Immutable.
class SystemModel {
public:
    explicit SystemModel(ModelDefinition definition);

    int horizon() const noexcept { return def_.horizon; }
    std::size_t num_states() const noexcept { return def_.states.size(); }
    std::size_t num_controls() const noexcept { return def_.controls.size(); }
    Index cemetery() const noexcept { return static_cast<Index>(def_.states.size()); }
    std::size_t num_uncertainties(int t) const { return def_.uncertainty.at(t).size(); }

    const std::string& state_label(Index x) const;
    const std::string& control_label(Index u) const { return def_.controls.at(u).label; }
    const std::string& uncertainty_label(int t, Index w) const { return def_.uncertainty.at(t).at(w); }
    std::span<const double> state_coords(Index x) const { return def_.states.at(x).coords; }
    std::span<const double> control_coords(Index u) const { return def_.controls.at(u).coords; }

    std::optional<Index> find_state(const std::string& label) const;
    std::optional<Index> find_control(const std::string& label) const;
    std::optional<Index> find_uncertainty(int t, const std::string& label) const;

    /// Raw dynamics table F_t(x, u, w); x must not be the cemetery.
    Index transition(int t, Index x, Index u, Index w) const {
        return def_.dynamics[t][(static_cast<std::size_t>(x) * num_controls() + u) *
                                    num_uncertainties(t) + w];
    }

    bool allowed(int t, Index x, Index u) const {
        return def_.allowed[t][static_cast<std::size_t>(x) * num_controls() + u] != 0;
    }
    std::span<const Index> allowed_controls(int t, Index x) const {
        return allowed_lists_[static_cast<std::size_t>(t) * num_states() + x];
    }

    /// One step with the cemetery rules: the cemetery is absorbing and a
    /// control outside the constraint set leads to the cemetery.
    Index step(int t, Index x, Index u, Index w) const;

    bool has_probabilities() const noexcept { return has_product_probabilities() || !joint_.empty(); }
    bool has_product_probabilities() const noexcept { return !def_.probabilities.empty(); }
    bool has_joint_distribution() const noexcept { return !joint_.empty(); }
    double probability(int t, Index w) const { return def_.probabilities.at(t).at(w); }
    /// Weight of a full scenario: joint entry when declared, product otherwise.
    double scenario_weight(const Scenario& scenario) const;

    std::span<const Index> robust_subset(int t) const { return robust_sets_.at(t); }
    bool has_robust_scenario_list() const noexcept { return !def_.robust_scenarios.empty(); }
    const std::vector<Scenario>& robust_scenario_list() const noexcept { return def_.robust_scenarios; }
    /// True when the robust scenario set equals the full scenario set.
    bool robust_is_full() const noexcept { return robust_is_full_; }

    const ModelDefinition& definition() const noexcept { return def_; }

    bool operator==(const SystemModel& other) const { return def_ == other.def_; }

private:
    void validate_index(int t, Index x, Index u, Index w) const;

    ModelDefinition def_;
    std::vector<std::vector<Index>> allowed_lists_;
    std::vector<std::vector<Index>> robust_sets_;
    std::map<Scenario, double> joint_;
    bool robust_is_full_ = true;
};

/// Open-loop flow from state x at time `start` under `controls` (applied at
/// start, start+1, ...). `scenario` is indexed by absolute time and must
/// cover every time at which a control is applied.
std::vector<Index> flow(const SystemModel& model, int start, Index x,
                        std::span<const Index> controls, std::span<const Index> scenario);

/// Number of scenarios in the full product or in the robust set, saturating
/// at UINT64_MAX.
std::uint64_t scenario_count(const SystemModel& model, bool robust_only);

/// Lexicographic enumeration of the full scenario set or of the robust set.
std::vector<Scenario> enumerate_scenarios(const SystemModel& model, bool robust_only,
                                          std::uint64_t cap = kDefaultScenarioCap);

/// Saturating multiplication used for enumeration sizes.
inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) noexcept {
    if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
    return a * b;
}

}  // namespace resilience
