#include "resil/model_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "resil/json.hpp"

namespace resil {

using namespace resilience;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

struct Line {
    int number;
    std::vector<std::string> tokens;
};

struct Section {
    int header_line = 0;
    std::vector<Line> lines;
};

class Parser {
public:
    Parser(std::string_view text, std::string_view source) : source_(source) { split(text); }

    ModelFile run() {
        parse_time();
        parse_points("states", def_.states);
        parse_points("controls", def_.controls);
        parse_uncertainty();
        def_.allocate();
        parse_dynamics();
        parse_constraints();

        std::optional<SystemModel> model;
        try {
            model.emplace(def_);
        } catch (const InputError& e) {
            throw InputError(where(validation_line(e.what())) + e.what());
        }
        parse_cost();
        auto risk = parse_risk();
        auto regime = parse_regime(risk);
        ModelFile file{std::move(*model), std::move(regime), std::move(risk)};
        try {
            validate(file.model, file.regime);
            if (file.risk) validate(file.model, *file.risk);
        } catch (const ConfigurationError& e) {
            throw ConfigurationError(where(section("regime").header_line) + e.what());
        } catch (const InputError& e) {
            throw InputError(where(section("regime").header_line) + e.what());
        }
        return file;
    }

private:
    // ---- lexical layer ------------------------------------------------------

    void split(std::string_view text) {
        static const std::set<std::string> known{"time",        "states", "controls", "uncertainty", "dynamics",
                                                 "constraints", "regime", "risk",     "cost"};
        std::string current;
        int number = 0;
        std::istringstream in{std::string(text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++number;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            std::istringstream words(raw);
            std::vector<std::string> tokens;
            for (std::string w; words >> w;) tokens.push_back(w);
            if (tokens.empty()) continue;
            if (tokens[0].front() == '[') {
                if (tokens.size() != 1 || tokens[0].back() != ']' || tokens[0].size() < 3)
                    fail(number, "malformed section header");
                current = tokens[0].substr(1, tokens[0].size() - 2);
                if (!known.count(current)) {
                    std::string msg = "unknown section [" + current + "]";
                    const auto hint = suggest(current, std::vector<std::string>(known.begin(), known.end()));
                    if (!hint.empty()) msg += "; did you mean [" + hint.front() + "]?";
                    fail(number, msg);
                }
                if (sections_.count(current)) fail(number, "duplicate section [" + current + "]");
                sections_[current].header_line = number;
                continue;
            }
            if (current.empty()) fail(number, "content before the first section header");
            sections_[current].lines.push_back({number, std::move(tokens)});
        }
    }

    std::string where(int line) const { return std::string(source_) + ":" + std::to_string(line) + ": "; }

    [[noreturn]] void fail(int line, const std::string& msg) const { throw InputError(where(line) + msg); }

    const Section& section(const std::string& name) const {
        static const Section empty;
        const auto it = sections_.find(name);
        return it == sections_.end() ? empty : it->second;
    }

    bool has_section(const std::string& name) const { return sections_.count(name) != 0; }

    const Section& require_section(const std::string& name) const {
        if (!has_section(name)) throw InputError(std::string(source_) + ": missing [" + name + "] section");
        return section(name);
    }

    // ---- scalar parsing -----------------------------------------------------

    double number(const Line& line, const std::string& token) const {
        double v = 0.0;
        const char* end = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(token.data(), end, v);
        if (ec != std::errc() || ptr != end) fail(line.number, "expected a number, got '" + token + "'");
        return v;
    }

    int integer(const Line& line, const std::string& token) const {
        int v = 0;
        const char* end = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(token.data(), end, v);
        if (ec != std::errc() || ptr != end) fail(line.number, "expected an integer, got '" + token + "'");
        return v;
    }

    bool boolean(const Line& line, const std::string& token) const {
        if (token == "true" || token == "1") return true;
        if (token == "false" || token == "0") return false;
        fail(line.number, "expected true or false, got '" + token + "'");
    }

    /// Times named by a `t` column: one time or `*` for all.
    std::vector<int> times(const Line& line, const std::string& token) const {
        std::vector<int> out;
        if (token == "*") {
            for (int t = 0; t < def_.horizon; ++t) out.push_back(t);
            return out;
        }
        const int t = integer(line, token);
        if (t < 0 || t >= def_.horizon)
            fail(line.number, "time " + token + " outside 0.." + std::to_string(def_.horizon - 1));
        out.push_back(t);
        return out;
    }

    Index label_in(const Line& line, const std::vector<LabeledPoint>& points, const std::string& label,
                   const char* what) const {
        for (std::size_t i = 0; i < points.size(); ++i)
            if (points[i].label == label) return static_cast<Index>(i);
        fail(line.number, std::string("unknown ") + what + " '" + label + "'");
    }

    Index state(const Line& line, const std::string& label) const {
        return label_in(line, def_.states, label, "state");
    }

    Index control(const Line& line, const std::string& label) const {
        return label_in(line, def_.controls, label, "control");
    }

    Index noise(const Line& line, int t, const std::string& label) const {
        const auto& labels = def_.uncertainty.at(t);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label) return static_cast<Index>(i);
        fail(line.number, "unknown uncertainty '" + label + "' at time " + std::to_string(t));
    }

    void arity(const Line& line, std::size_t min, std::size_t max, const char* form) const {
        if (line.tokens.size() < min || line.tokens.size() > max) fail(line.number, std::string("expected: ") + form);
    }

    // ---- model sections -----------------------------------------------------

    void parse_time() {
        const auto& sec = require_section("time");
        bool seen = false;
        for (const auto& line : sec.lines) {
            if (line.tokens[0] != "horizon") fail(line.number, "unknown key '" + line.tokens[0] + "' in [time]");
            arity(line, 2, 2, "horizon <K>");
            if (seen) fail(line.number, "horizon given twice");
            def_.horizon = integer(line, line.tokens[1]);
            if (def_.horizon < 1) fail(line.number, "horizon must be at least 1");
            seen = true;
        }
        if (!seen) fail(sec.header_line, "[time] needs 'horizon <K>'");
    }

    void parse_points(const std::string& name, std::vector<LabeledPoint>& out) {
        const auto& sec = require_section(name);
        for (const auto& line : sec.lines) {
            const auto& label = line.tokens[0];
            if (label.front() == '@' || label == "*" || label == "-")
                fail(line.number, "label '" + label + "' is reserved");
            if (label.find(',') != std::string::npos) fail(line.number, "labels may not contain ','");
            LabeledPoint p{label, {}};
            for (std::size_t i = 1; i < line.tokens.size(); ++i) p.coords.push_back(number(line, line.tokens[i]));
            out.push_back(std::move(p));
        }
        if (out.empty()) fail(sec.header_line, "[" + name + "] is empty");
    }

    void parse_uncertainty() {
        const auto& sec = require_section("uncertainty");
        const auto K = static_cast<std::size_t>(def_.horizon);
        def_.uncertainty.assign(K, {});
        std::vector<int> set_line(K, 0);
        for (const auto& line : sec.lines) {
            if (line.tokens[0] != "set") continue;
            if (line.tokens.size() < 3) fail(line.number, "expected: set <t|*> <label>...");
            for (int t : times(line, line.tokens[1])) {
                if (set_line[t]) fail(line.number, "uncertainty set at time " + std::to_string(t) + " given twice");
                set_line[t] = line.number;
                std::vector<std::string> labels(line.tokens.begin() + 2, line.tokens.end());
                for (const auto& l : labels)
                    if (l.find(',') != std::string::npos || l == "-" || l.front() == '@')
                        fail(line.number, "invalid uncertainty label '" + l + "'");
                def_.uncertainty[t] = std::move(labels);
            }
        }
        for (std::size_t t = 0; t < K; ++t)
            if (!set_line[t]) fail(sec.header_line, "no uncertainty set for time " + std::to_string(t));

        std::vector<int> prob_line(K, 0), robust_line(K, 0);
        std::vector<std::vector<double>> probabilities(K);
        std::vector<std::vector<Index>> robust(K);
        for (const auto& line : sec.lines) {
            const auto& key = line.tokens[0];
            if (key == "set") continue;
            if (key == "prob" || key == "robust") {
                if (line.tokens.size() < 3) fail(line.number, "expected: " + key + " <t|*> <value>...");
                for (int t : times(line, line.tokens[1])) {
                    auto& seen = key == "prob" ? prob_line[t] : robust_line[t];
                    if (seen) fail(line.number, key + " at time " + std::to_string(t) + " given twice");
                    seen = line.number;
                    if (key == "prob") {
                        if (line.tokens.size() - 2 != def_.uncertainty[t].size())
                            fail(line.number, "prob at time " + std::to_string(t) + " needs " +
                                                  std::to_string(def_.uncertainty[t].size()) + " values");
                        for (std::size_t i = 2; i < line.tokens.size(); ++i)
                            probabilities[t].push_back(number(line, line.tokens[i]));
                    } else {
                        for (std::size_t i = 2; i < line.tokens.size(); ++i)
                            robust[t].push_back(noise(line, t, line.tokens[i]));
                    }
                }
            } else if (key == "robust_scenario") {
                def_.robust_scenarios.push_back(scenario(line, 1));
            } else if (key == "joint") {
                if (line.tokens.size() < 2) fail(line.number, "expected: joint <p> <label>...");
                const double p = number(line, line.tokens[1]);
                def_.joint.emplace_back(scenario(line, 2), p);
            } else {
                fail(line.number, "unknown key '" + key + "' in [uncertainty]");
            }
        }
        const bool any_prob = std::any_of(prob_line.begin(), prob_line.end(), [](int l) { return l != 0; });
        const bool any_robust = std::any_of(robust_line.begin(), robust_line.end(), [](int l) { return l != 0; });
        for (std::size_t t = 0; t < K; ++t) {
            if (any_prob && !prob_line[t]) fail(sec.header_line, "prob missing at time " + std::to_string(t));
            if (any_robust && !robust_line[t]) fail(sec.header_line, "robust missing at time " + std::to_string(t));
        }
        if (any_prob) def_.probabilities = std::move(probabilities);
        if (any_robust) def_.robust = std::move(robust);
    }

    Scenario scenario(const Line& line, std::size_t first) const {
        if (line.tokens.size() - first != static_cast<std::size_t>(def_.horizon))
            fail(line.number, "scenario needs " + std::to_string(def_.horizon) + " labels");
        Scenario s;
        for (int t = 0; t < def_.horizon; ++t) s.push_back(noise(line, t, line.tokens[first + t]));
        return s;
    }

    void parse_dynamics() {
        const auto& sec = require_section("dynamics");
        std::map<std::tuple<int, Index, Index, Index>, int> seen;
        for (const auto& line : sec.lines) {
            arity(line, 5, 5, "<t|*> <state> <control> <uncertainty> <next>");
            const Index x = state(line, line.tokens[1]);
            const Index u = control(line, line.tokens[2]);
            const Index next = line.tokens[4] == kCemeteryLabel ? static_cast<Index>(def_.states.size())
                                                                 : state(line, line.tokens[4]);
            for (int t : times(line, line.tokens[0])) {
                const Index w = noise(line, t, line.tokens[3]);
                const auto [it, fresh] = seen.emplace(std::make_tuple(t, x, u, w), line.number);
                if (!fresh)
                    fail(line.number, "dynamics row duplicates line " + std::to_string(it->second) + " at time " +
                                          std::to_string(t));
                def_.set_next(t, x, u, w, next);
            }
        }
    }

    void parse_constraints() {
        if (!has_section("constraints")) return;
        std::map<std::pair<int, Index>, int> seen;
        for (const auto& line : section("constraints").lines) {
            if (line.tokens.size() < 2) fail(line.number, "expected: <t|*> <state> <control>...");
            const Index x = state(line, line.tokens[1]);
            std::vector<Index> allowed;
            for (std::size_t i = 2; i < line.tokens.size(); ++i) allowed.push_back(control(line, line.tokens[i]));
            std::sort(allowed.begin(), allowed.end());
            allowed.erase(std::unique(allowed.begin(), allowed.end()), allowed.end());
            for (int t : times(line, line.tokens[0])) {
                const auto [it, fresh] = seen.emplace(std::make_pair(t, x), line.number);
                if (!fresh) fail(line.number, "constraint row duplicates line " + std::to_string(it->second));
                def_.set_allowed(t, x, allowed);
            }
        }
    }

    /// Best line to cite for a model validation message.
    int validation_line(const std::string& msg) const {
        if (msg.find("dynamics") != std::string::npos) return section("dynamics").header_line;
        if (msg.find("constraint") != std::string::npos) return section("constraints").header_line;
        return section("uncertainty").header_line;
    }

    // ---- cost, risk, regime -------------------------------------------------

    struct CostTables {
        double penalty = kDefaultCemeteryPenalty;
        std::vector<double> effort;
        TabularCost tabular;
        bool has_tabular = false;
        bool has_effort = false;
    };

    void parse_cost() {
        const auto K = static_cast<std::size_t>(def_.horizon);
        cost_.tabular.state_cost.assign(K + 1, std::vector<double>(def_.states.size(), 0.0));
        cost_.tabular.control_cost.assign(K, std::vector<double>(def_.controls.size(), 0.0));
        if (!has_section("cost")) return;
        std::vector<int> effort_line(def_.controls.size(), 0);
        for (const auto& line : section("cost").lines) {
            const auto& key = line.tokens[0];
            if (key == "penalty") {
                arity(line, 2, 2, "penalty <value>");
                cost_.penalty = number(line, line.tokens[1]);
            } else if (key == "effort") {
                arity(line, 3, 3, "effort <control> <value>");
                const Index u = control(line, line.tokens[1]);
                if (effort_line[u]) fail(line.number, "effort for control '" + line.tokens[1] + "' given twice");
                effort_line[u] = line.number;
                if (!cost_.has_effort) cost_.effort.assign(def_.controls.size(), 0.0);
                cost_.has_effort = true;
                cost_.effort[u] = number(line, line.tokens[2]);
            } else if (key == "state") {
                arity(line, 4, 4, "state <t|*> <state> <value>");
                const Index x = state(line, line.tokens[2]);
                const double v = number(line, line.tokens[3]);
                std::vector<int> ts;
                if (line.tokens[1] == "*") {
                    for (int t = 0; t <= def_.horizon; ++t) ts.push_back(t);
                } else {
                    const int t = integer(line, line.tokens[1]);
                    if (t < 0 || t > def_.horizon)
                        fail(line.number, "time " + line.tokens[1] + " outside 0.." + std::to_string(def_.horizon));
                    ts.push_back(t);
                }
                for (int t : ts) cost_.tabular.state_cost[t][x] = v;
                cost_.has_tabular = true;
            } else if (key == "control") {
                arity(line, 4, 4, "control <t|*> <control> <value>");
                const Index u = control(line, line.tokens[2]);
                const double v = number(line, line.tokens[3]);
                for (int t : times(line, line.tokens[1])) cost_.tabular.control_cost[t][u] = v;
                cost_.has_tabular = true;
            } else {
                fail(line.number, "unknown key '" + key + "' in [cost]");
            }
        }
        if (cost_.has_effort)
            for (std::size_t u = 0; u < effort_line.size(); ++u)
                if (!effort_line[u])
                    fail(section("cost").header_line, "effort missing for control '" + def_.controls[u].label + "'");
    }

    /// Key/value view of the [risk] or [regime] section with per-key line numbers.
    struct Keyed {
        std::map<std::string, const Line*> entries;
        std::vector<const Line*> members;
        int header = 0;
        std::set<std::string> used;

        const Line* get(const std::string& k) {
            used.insert(k);
            const auto it = entries.find(k);
            return it == entries.end() ? nullptr : it->second;
        }
    };

    Keyed keyed(const std::string& name) const {
        Keyed out;
        out.header = section(name).header_line;
        for (const auto& line : section(name).lines) {
            if (line.tokens[0] == "member") {
                out.members.push_back(&line);
                continue;
            }
            if (!out.entries.emplace(line.tokens[0], &line).second)
                fail(line.number, "key '" + line.tokens[0] + "' given twice in [" + name + "]");
        }
        return out;
    }

    void reject_unused(const Keyed& k, const std::string& section_name, const std::string& kind) const {
        for (const auto& [key, line] : k.entries)
            if (!k.used.count(key))
                fail(line->number, "key '" + key + "' does not apply to " + section_name + " kind " + kind);
    }

    const Line& required(Keyed& k, const std::string& key, const std::string& context) const {
        const Line* line = k.get(key);
        if (!line) fail(k.header, context + " needs '" + key + "'");
        return *line;
    }

    std::string single(Keyed& k, const std::string& key, const std::string& context) const {
        const Line& line = required(k, key, context);
        if (line.tokens.size() != 2) fail(line.number, "expected: " + key + " <value>");
        return line.tokens[1];
    }

    StateSet state_set(const Line& line) const {
        StateSet s(def_.states.size());
        for (std::size_t i = 1; i < line.tokens.size(); ++i) s.insert(state(line, line.tokens[i]));
        return s;
    }

    OuterFunctional outer(Keyed& k, const std::string& context) const {
        const Line& line = required(k, "outer", context);
        if (line.tokens.size() != 2) fail(line.number, "expected: outer expectation|worst_case|cvar");
        OuterFunctional o;
        const auto& name = line.tokens[1];
        if (name == "expectation") {
            o.kind = OuterFunctional::Kind::Expectation;
        } else if (name == "worst_case") {
            o.kind = OuterFunctional::Kind::WorstCase;
        } else if (name == "cvar") {
            o.kind = OuterFunctional::Kind::CVaR;
            const Line& lv = required(k, "level", "outer cvar");
            if (lv.tokens.size() != 2) fail(lv.number, "expected: level <value>");
            o.level = number(lv, lv.tokens[1]);
        } else {
            fail(line.number, "unknown outer functional '" + name + "' (expected expectation, worst_case, cvar)");
        }
        return o;
    }

    std::optional<RiskMeasureSpec> parse_risk() {
        if (!has_section("risk")) return std::nullopt;
        Keyed k = keyed("risk");
        const std::string kind = single(k, "kind", "[risk]");
        const auto acceptable = [&] { return state_set(required(k, "A", "risk " + kind)); };
        RiskMeasureSpec spec;
        if (kind == "worst_case_violation") {
            spec = WorstCaseViolation{acceptable()};
        } else if (kind == "exceedance") {
            spec = Exceedance{acceptable()};
        } else if (kind == "ambiguity_exceedance") {
            spec = AmbiguityExceedance{acceptable(), ambiguity_members(k)};
        } else if (kind == "exit_count") {
            spec = ExitCountFunctional{acceptable(), outer(k, "risk exit_count")};
        } else if (kind == "max_recovery_time") {
            spec = max_recovery_time_risk(acceptable());
        } else if (kind == "composed") {
            const Line& cl = required(k, "cost", "risk composed");
            if (cl.tokens.size() != 2) fail(cl.number, "expected: cost <kind>");
            const auto& cost_kind = cl.tokens[1];
            CostFunction cost;
            cost.cemetery_penalty = cost_.penalty;
            if (cost_kind == "time_outside") {
                cost.kind = TimeOutsideCost{acceptable()};
            } else if (cost_kind == "terminal") {
                cost.kind = TerminalCost{acceptable()};
            } else if (cost_kind == "recovery_time") {
                cost.kind = RecoveryTimeCost{acceptable()};
            } else if (cost_kind == "control_effort") {
                cost.kind = ControlEffortCost{cost_.effort};
            } else if (cost_kind == "tabular") {
                cost.kind = cost_.tabular;
            } else {
                fail(cl.number, "unknown cost kind '" + cost_kind +
                                    "' (expected time_outside, control_effort, terminal, tabular, recovery_time)");
            }
            spec = ComposedRisk{std::move(cost), outer(k, "risk composed")};
        } else {
            std::string msg = "unknown risk kind '" + kind + "'";
            static const std::vector<std::string> kinds{"worst_case_violation", "exceedance", "ambiguity_exceedance",
                                                        "exit_count",           "composed",   "max_recovery_time"};
            const auto hint = suggest(kind, kinds);
            if (!hint.empty()) msg += "; did you mean " + hint.front() + "?";
            fail(k.entries.at("kind")->number, msg);
        }
        if (!std::holds_alternative<AmbiguityExceedance>(spec) && !k.members.empty())
            fail(k.members.front()->number, "'member' applies only to ambiguity_exceedance");
        reject_unused(k, "risk", kind);
        return spec;
    }

    std::vector<ProbabilityAssignment> ambiguity_members(const Keyed& k) const {
        std::map<int, std::vector<std::vector<double>>> members;
        std::map<int, int> first_line;
        for (const Line* line : k.members) {
            if (line->tokens.size() < 4) fail(line->number, "expected: member <m> <t|*> <p>...");
            const int m = integer(*line, line->tokens[1]);
            if (m < 0) fail(line->number, "member index must be nonnegative");
            auto& rows = members[m];
            first_line.emplace(m, line->number);
            rows.resize(static_cast<std::size_t>(def_.horizon));
            for (int t : times(*line, line->tokens[2])) {
                if (!rows[t].empty()) fail(line->number, "member " + line->tokens[1] + " repeats time " + std::to_string(t));
                for (std::size_t i = 3; i < line->tokens.size(); ++i) rows[t].push_back(number(*line, line->tokens[i]));
            }
        }
        if (members.empty()) fail(k.header, "ambiguity_exceedance needs at least one 'member'");
        std::vector<ProbabilityAssignment> out;
        int expected = 0;
        for (auto& [m, rows] : members) {
            if (m != expected++) fail(first_line[m], "members must be numbered 0, 1, 2, ...");
            for (std::size_t t = 0; t < rows.size(); ++t)
                if (rows[t].empty())
                    fail(first_line[m], "member " + std::to_string(m) + " misses time " + std::to_string(t));
            out.push_back(std::move(rows));
        }
        return out;
    }

    RegimeSpec parse_regime(const std::optional<RiskMeasureSpec>& risk) {
        require_section("regime");
        Keyed k = keyed("regime");
        if (!k.members.empty()) fail(k.members.front()->number, "'member' is not a regime key");
        const std::string kind = single(k, "kind", "[regime]");
        const std::string ctx = "regime " + kind;
        const auto set_of = [&](const char* key) { return state_set(required(k, key, ctx)); };
        const auto real = [&](const char* key) {
            const std::string v = single(k, key, ctx);
            return number(*k.entries.at(key), v);
        };
        const auto whole = [&](const char* key) {
            const std::string v = single(k, key, ctx);
            return integer(*k.entries.at(key), v);
        };
        const auto flag = [&](const char* key) {
            const Line* line = k.get(key);
            if (!line) return false;
            if (line->tokens.size() != 2) fail(line->number, std::string("expected: ") + key + " true|false");
            return boolean(*line, line->tokens[1]);
        };

        RegimeSpec regime;
        if (kind == "viability") {
            regime = Viability{set_of("A")};
        } else if (kind == "robust_recovery") {
            regime = RobustRecovery{set_of("A"), whole("deadline")};
        } else if (kind == "stochastic_viability") {
            regime = StochasticViability{set_of("A"), real("beta")};
        } else if (kind == "bounded") {
            regime = Bounded{set_of("B")};
        } else if (kind == "prob_excursion") {
            ProbExcursion r{set_of("B"), real("beta")};
            r.count_controls = flag("count_controls");
            regime = r;
        } else if (kind == "at_most_k_exits") {
            AtMostKExits r{set_of("B"), whole("k")};
            r.count_controls = flag("count_controls");
            regime = r;
        } else if (kind == "stabilize") {
            const std::string center = single(k, "center", ctx);
            regime = Stabilize{state(*k.entries.at("center"), center), real("radius"), whole("window")};
        } else if (kind == "control_event") {
            const Line& line = required(k, "C", ctx);
            ControlSet c(def_.controls.size());
            for (std::size_t i = 1; i < line.tokens.size(); ++i) c.insert(control(line, line.tokens[i]));
            regime = ControlEvent{c};
        } else if (kind == "risk_containment") {
            if (!risk) fail(k.header, "regime risk_containment needs a [risk] section");
            regime = RiskContainment{*risk, real("alpha")};
        } else {
            std::string msg = "unknown regime kind '" + kind + "'";
            const auto hint = suggest(kind, regime_kinds());
            if (!hint.empty()) {
                msg += "; did you mean ";
                for (std::size_t i = 0; i < hint.size(); ++i) msg += (i ? ", " : "") + hint[i];
                msg += "?";
            }
            msg += " (known kinds:";
            for (const auto& name : regime_kinds()) msg += " " + name;
            msg += ")";
            fail(k.entries.at("kind")->number, msg);
        }
        reject_unused(k, "regime", kind);
        return regime;
    }

    std::string_view source_;
    std::map<std::string, Section> sections_;
    ModelDefinition def_;
    CostTables cost_;
};

// ---- serialization ----------------------------------------------------------

std::string join_labels(const SystemModel& model, const StateSet& set) {
    std::string out;
    for (Index x : set.members()) out += " " + model.state_label(x);
    return out;
}

const char* outer_name(OuterFunctional::Kind k) {
    switch (k) {
        case OuterFunctional::Kind::Expectation: return "expectation";
        case OuterFunctional::Kind::WorstCase: return "worst_case";
        case OuterFunctional::Kind::CVaR: return "cvar";
    }
    return "expectation";
}

void write_outer(std::ostream& out, const OuterFunctional& o) {
    out << "outer " << outer_name(o.kind) << "\n";
    if (o.kind == OuterFunctional::Kind::CVaR) out << "level " << format_double(o.level) << "\n";
}

void write_cost_section(std::ostream& out, const SystemModel& model, const RiskMeasureSpec& risk) {
    const auto* composed = std::get_if<ComposedRisk>(&risk);
    if (!composed) return;
    const auto& cost = composed->cost;
    std::ostringstream body;
    if (cost.cemetery_penalty != kDefaultCemeteryPenalty)
        body << "penalty " << format_double(cost.cemetery_penalty) << "\n";
    if (const auto* e = std::get_if<ControlEffortCost>(&cost.kind); e && !e->per_control.empty())
        for (Index u = 0; u < e->per_control.size(); ++u)
            body << "effort " << model.control_label(u) << " " << format_double(e->per_control[u]) << "\n";
    if (const auto* tab = std::get_if<TabularCost>(&cost.kind)) {
        for (std::size_t t = 0; t < tab->state_cost.size(); ++t)
            for (Index x = 0; x < tab->state_cost[t].size(); ++x)
                if (tab->state_cost[t][x] != 0.0)
                    body << "state " << t << " " << model.state_label(x) << " " << format_double(tab->state_cost[t][x])
                         << "\n";
        for (std::size_t t = 0; t < tab->control_cost.size(); ++t)
            for (Index u = 0; u < tab->control_cost[t].size(); ++u)
                if (tab->control_cost[t][u] != 0.0)
                    body << "control " << t << " " << model.control_label(u) << " "
                         << format_double(tab->control_cost[t][u]) << "\n";
    }
    if (!body.str().empty()) out << "\n[cost]\n" << body.str();
}

void write_risk_section(std::ostream& out, const SystemModel& model, const RiskMeasureSpec& risk) {
    out << "\n[risk]\n";
    std::visit(overloaded{
                   [&](const WorstCaseViolation& r) {
                       out << "kind worst_case_violation\nA" << join_labels(model, r.acceptable) << "\n";
                   },
                   [&](const Exceedance& r) { out << "kind exceedance\nA" << join_labels(model, r.acceptable) << "\n"; },
                   [&](const AmbiguityExceedance& r) {
                       out << "kind ambiguity_exceedance\nA" << join_labels(model, r.acceptable) << "\n";
                       for (std::size_t m = 0; m < r.members.size(); ++m)
                           for (std::size_t t = 0; t < r.members[m].size(); ++t) {
                               out << "member " << m << " " << t;
                               for (double p : r.members[m][t]) out << " " << format_double(p);
                               out << "\n";
                           }
                   },
                   [&](const ExitCountFunctional& r) {
                       out << "kind exit_count\nA" << join_labels(model, r.acceptable) << "\n";
                       write_outer(out, r.outer);
                   },
                   [&](const ComposedRisk& r) {
                       out << "kind composed\n";
                       std::visit(overloaded{
                                      [&](const TimeOutsideCost& c) {
                                          out << "cost time_outside\nA" << join_labels(model, c.acceptable) << "\n";
                                      },
                                      [&](const TerminalCost& c) {
                                          out << "cost terminal\nA" << join_labels(model, c.acceptable) << "\n";
                                      },
                                      [&](const RecoveryTimeCost& c) {
                                          out << "cost recovery_time\nA" << join_labels(model, c.acceptable) << "\n";
                                      },
                                      [&](const ControlEffortCost&) { out << "cost control_effort\n"; },
                                      [&](const TabularCost&) { out << "cost tabular\n"; },
                                  },
                                  r.cost.kind);
                       write_outer(out, r.outer);
                   },
               },
               risk);
}

void write_regime_section(std::ostream& out, const SystemModel& model, const RegimeSpec& regime) {
    out << "\n[regime]\nkind " << regime_name(regime) << "\n";
    std::visit(overloaded{
                   [&](const Viability& r) { out << "A" << join_labels(model, r.acceptable) << "\n"; },
                   [&](const RobustRecovery& r) {
                       out << "A" << join_labels(model, r.acceptable) << "\ndeadline " << r.deadline << "\n";
                   },
                   [&](const StochasticViability& r) {
                       out << "A" << join_labels(model, r.acceptable) << "\nbeta " << format_double(r.beta) << "\n";
                   },
                   [&](const Bounded& r) { out << "B" << join_labels(model, r.region) << "\n"; },
                   [&](const ProbExcursion& r) {
                       out << "B" << join_labels(model, r.region) << "\nbeta " << format_double(r.beta) << "\n";
                       if (r.count_controls) out << "count_controls true\n";
                   },
                   [&](const AtMostKExits& r) {
                       out << "B" << join_labels(model, r.region) << "\nk " << r.max_exits << "\n";
                       if (r.count_controls) out << "count_controls true\n";
                   },
                   [&](const Stabilize& r) {
                       out << "center " << model.state_label(r.center) << "\nradius " << format_double(r.radius)
                           << "\nwindow " << r.window << "\n";
                   },
                   [&](const ControlEvent& r) {
                       out << "C";
                       for (Index u : r.controls.members()) out << " " << model.control_label(u);
                       out << "\n";
                   },
                   [&](const RiskContainment& r) { out << "alpha " << format_double(r.alpha) << "\n"; },
               },
               regime);
}

void write_points(std::ostream& out, const std::vector<LabeledPoint>& points) {
    for (const auto& p : points) {
        out << p.label;
        for (double c : p.coords) out << " " << format_double(c);
        out << "\n";
    }
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

}  // namespace

const std::vector<std::string>& regime_kinds() {
    static const std::vector<std::string> kinds{"viability",       "robust_recovery", "stochastic_viability",
                                                "bounded",         "prob_excursion",  "at_most_k_exits",
                                                "stabilize",       "control_event",   "risk_containment"};
    return kinds;
}

std::vector<std::string> suggest(std::string_view word, const std::vector<std::string>& known) {
    std::vector<std::pair<std::size_t, std::string>> scored;
    for (const auto& k : known) {
        const std::size_t d = edit_distance(word, k);
        const bool prefix = !word.empty() && k.rfind(word, 0) == 0;
        if (d <= 3 || prefix) scored.emplace_back(prefix ? 0 : d, k);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (auto& s : scored) out.push_back(std::move(s.second));
    return out;
}

ModelFile parse_model(std::string_view text, std::string_view source) { return Parser(text, source).run(); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelFile load_model(const std::filesystem::path& path) { return parse_model(read_file(path), path.string()); }

std::string serialize_model(const ModelFile& file) {
    const SystemModel& model = file.model;
    const ModelDefinition& def = model.definition();
    const int K = model.horizon();
    std::ostringstream out;

    out << "[time]\nhorizon " << K << "\n";
    out << "\n[states]\n";
    write_points(out, def.states);
    out << "\n[controls]\n";
    write_points(out, def.controls);

    out << "\n[uncertainty]\n";
    for (int t = 0; t < K; ++t) {
        out << "set " << t;
        for (const auto& l : def.uncertainty[t]) out << " " << l;
        out << "\n";
    }
    for (std::size_t t = 0; t < def.probabilities.size(); ++t) {
        out << "prob " << t;
        for (double p : def.probabilities[t]) out << " " << format_double(p);
        out << "\n";
    }
    for (std::size_t t = 0; t < def.robust.size(); ++t) {
        out << "robust " << t;
        for (Index w : def.robust[t]) out << " " << model.uncertainty_label(static_cast<int>(t), w);
        out << "\n";
    }
    for (const auto& s : def.robust_scenarios) {
        out << "robust_scenario";
        for (int t = 0; t < K; ++t) out << " " << model.uncertainty_label(t, s[t]);
        out << "\n";
    }
    for (const auto& [s, p] : def.joint) {
        out << "joint " << format_double(p);
        for (int t = 0; t < K; ++t) out << " " << model.uncertainty_label(t, s[t]);
        out << "\n";
    }

    out << "\n[dynamics]\n";
    for (int t = 0; t < K; ++t)
        for (Index x = 0; x < model.num_states(); ++x)
            for (Index u = 0; u < model.num_controls(); ++u)
                for (Index w = 0; w < model.num_uncertainties(t); ++w)
                    out << t << " " << model.state_label(x) << " " << model.control_label(u) << " "
                        << model.uncertainty_label(t, w) << " " << model.state_label(model.transition(t, x, u, w))
                        << "\n";

    std::ostringstream constraints;
    for (int t = 0; t < K; ++t)
        for (Index x = 0; x < model.num_states(); ++x) {
            const auto allowed = model.allowed_controls(t, x);
            if (allowed.size() == model.num_controls()) continue;
            constraints << t << " " << model.state_label(x);
            for (Index u : allowed) constraints << " " << model.control_label(u);
            constraints << "\n";
        }
    if (!constraints.str().empty()) out << "\n[constraints]\n" << constraints.str();

    std::optional<RiskMeasureSpec> risk = file.risk;
    if (const auto* rc = std::get_if<RiskContainment>(&file.regime); rc && !risk) risk = rc->measure;
    if (risk) {
        write_cost_section(out, model, *risk);
        write_risk_section(out, model, *risk);
    }
    write_regime_section(out, model, file.regime);
    return out.str();
}

}  // namespace resil
