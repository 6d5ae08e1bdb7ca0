#include "resil/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "resil/json.hpp"
#include "resil/model_file.hpp"
#include "resil/strategy_file.hpp"
#include "resilience/engine.hpp"
#include "resilience/optimize.hpp"
#include "resilience/oracle.hpp"

namespace resil {

using namespace resilience;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

struct Options {
    std::string model;
    std::string out;
    std::string strategy;
    std::string x0;
    int t = 0;
    std::string strategy_class = "markov";
    int deadline = 0;
    double beta = 0.0;
    double alpha = 0.0;
    std::uint64_t cap = kDefaultStrategyCap;
    unsigned threads = 1;
    bool robust_only = false;

    bool has_deadline = false;
    bool has_beta = false;
    bool has_alpha = false;
    bool has_x0 = false;
    bool has_strategy = false;
};

/// Everything a subcommand needs after flag parsing.
struct Context {
    const Options& opts;
    ModelFile file;
    std::ostream& out;

    const SystemModel& model() const { return file.model; }

    StrategyClass strategy_class() const {
        return opts.strategy_class == "adapted" ? StrategyClass::Adapted : StrategyClass::Markovian;
    }

    SearchOptions search() const {
        SearchOptions s;
        s.strategy_cap = opts.cap;
        s.threads = std::max(1u, opts.threads);
        return s;
    }

    Index x0() const {
        const auto x = model().find_state(opts.x0);
        if (!x || *x >= model().num_states()) throw InputError("unknown initial state '" + opts.x0 + "'");
        return *x;
    }

    int time() const {
        if (opts.t < 0 || opts.t > model().horizon())
            throw InputError("--t " + std::to_string(opts.t) + " outside 0.." + std::to_string(model().horizon()));
        return opts.t;
    }

    Strategy strategy() const { return load_strategy(model(), opts.strategy); }

    void emit(const std::string& name, const std::string& content) const {
        if (opts.out.empty()) return;
        std::filesystem::create_directories(opts.out);
        const auto path = std::filesystem::path(opts.out) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InputError("cannot write " + path.string());
        f << content;
    }

    /// Writes the main JSON document to stdout and to `name` under --out.
    void emit_json(const std::string& name, const JsonWriter& json) const {
        out << json.str();
        emit(name, json.str());
    }
};

// ---- helpers ----------------------------------------------------------------

std::vector<std::string> state_labels(const SystemModel& model, const StateSet& set) {
    std::vector<std::string> out;
    for (Index x : set.members()) out.push_back(model.state_label(x));
    return out;
}

std::vector<std::string> control_labels(const SystemModel& model, const std::vector<Index>& controls) {
    std::vector<std::string> out;
    for (Index u : controls) out.push_back(model.control_label(u));
    return out;
}

const StateSet& acceptable_of(const RegimeSpec& regime, const char* command) {
    if (const auto* r = std::get_if<Viability>(&regime)) return r->acceptable;
    if (const auto* r = std::get_if<RobustRecovery>(&regime)) return r->acceptable;
    if (const auto* r = std::get_if<StochasticViability>(&regime)) return r->acceptable;
    throw InputError(std::string(command) +
                     " needs a regime with an acceptable set A (viability, robust_recovery, stochastic_viability)");
}

const StateSet* maybe_acceptable(const RegimeSpec& regime) {
    if (const auto* r = std::get_if<Viability>(&regime)) return &r->acceptable;
    if (const auto* r = std::get_if<RobustRecovery>(&regime)) return &r->acceptable;
    if (const auto* r = std::get_if<StochasticViability>(&regime)) return &r->acceptable;
    return nullptr;
}

void apply_overrides(RegimeSpec& regime, const Options& o) {
    if (o.has_deadline) {
        auto* r = std::get_if<RobustRecovery>(&regime);
        if (!r) throw InputError("--deadline applies only to the robust_recovery regime");
        r->deadline = o.deadline;
    }
    if (o.has_beta) {
        if (auto* r = std::get_if<StochasticViability>(&regime)) {
            r->beta = o.beta;
        } else if (auto* p = std::get_if<ProbExcursion>(&regime)) {
            p->beta = o.beta;
        } else {
            throw InputError("--beta applies only to the stochastic_viability and prob_excursion regimes");
        }
    }
    if (o.has_alpha) {
        auto* r = std::get_if<RiskContainment>(&regime);
        if (!r) throw InputError("--alpha applies only to the risk_containment regime");
        r->alpha = o.alpha;
    }
}

const char* risk_name(const RiskMeasureSpec& risk) {
    return std::visit(overloaded{
                          [](const WorstCaseViolation&) { return "worst_case_violation"; },
                          [](const Exceedance&) { return "exceedance"; },
                          [](const AmbiguityExceedance&) { return "ambiguity_exceedance"; },
                          [](const ExitCountFunctional&) { return "exit_count"; },
                          [](const ComposedRisk&) { return "composed"; },
                      },
                      risk);
}

const RiskMeasureSpec& require_risk(const Context& ctx, const char* command) {
    if (!ctx.file.risk) throw InputError(std::string(command) + " needs a [risk] section in the model file");
    return *ctx.file.risk;
}

void header(JsonWriter& j, const char* command, const Context& ctx) {
    j.begin_object();
    j.key("command").value(command);
    j.key("regime").value(regime_name(ctx.file.regime));
}

std::string optional_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

// ---- subcommands ------------------------------------------------------------

int cmd_check(const Context& ctx) {
    const Index x0 = ctx.x0();
    const int t = ctx.time();
    const Strategy strategy = ctx.strategy();
    const bool ok = check_resilient(ctx.model(), strategy, x0, t, ctx.file.regime);
    JsonWriter j;
    header(j, "check", ctx);
    j.key("x0").value(ctx.model().state_label(x0));
    j.key("t").value(t);
    j.key("resilient").value(ok);
    j.end_object();
    ctx.emit_json("check.json", j);
    return ok ? kExitOk : kExitNotResilient;
}

int cmd_kernel(const Context& ctx) {
    const auto& model = ctx.model();
    const StateSet& a = acceptable_of(ctx.file.regime, "kernel");
    const KernelTable kernel = robust_viability_kernel(model, a);
    const int K = model.horizon();

    std::ostringstream csv;
    csv << "t,state,member,witness\n";
    JsonWriter j;
    header(j, "kernel", ctx);
    j.key("acceptable").strings(state_labels(model, a));
    j.key("layers").begin_array();
    for (int t = 0; t <= K; ++t) {
        j.begin_object();
        j.key("t").value(t);
        j.key("members").strings(state_labels(model, kernel.members[t]));
        if (t < K) {
            j.key("witness").strings(control_labels(model, kernel.witness[t]));
        } else {
            j.key("witness").null();
        }
        j.end_object();
        for (Index x = 0; x < model.num_states(); ++x)
            csv << t << "," << model.state_label(x) << "," << (kernel.members[t].contains(x) ? 1 : 0) << ","
                << (t < K ? model.control_label(kernel.witness[t][x]) : "") << "\n";
    }
    j.end_array();
    j.end_object();
    ctx.emit("kernel.csv", csv.str());
    ctx.emit_json("kernel.json", j);
    return kExitOk;
}

int cmd_value(const Context& ctx) {
    const auto& model = ctx.model();
    const StateSet& a = acceptable_of(ctx.file.regime, "value");
    const int t0 = ctx.time();
    double beta = 1.0;
    if (const auto* r = std::get_if<StochasticViability>(&ctx.file.regime)) beta = r->beta;
    if (ctx.opts.has_beta) beta = ctx.opts.beta;
    const ValueTable table = stochastic_viability_value(model, a);
    const int K = model.horizon();

    std::ostringstream csv;
    csv << "t,state,value,witness\n";
    JsonWriter j;
    header(j, "value", ctx);
    j.key("acceptable").strings(state_labels(model, a));
    j.key("beta").value(beta);
    j.key("t").value(t0);
    j.key("resilient").strings(state_labels(model, table.resilient(t0, beta)));
    j.key("layers").begin_array();
    for (int t = 0; t <= K; ++t) {
        j.begin_object();
        j.key("t").value(t);
        j.key("value").begin_array();
        for (double v : table.value[t]) j.value(v);
        j.end_array();
        if (t < K) {
            j.key("witness").strings(control_labels(model, table.witness[t]));
        } else {
            j.key("witness").null();
        }
        j.end_object();
        for (Index x = 0; x < model.num_states(); ++x)
            csv << t << "," << model.state_label(x) << "," << format_double(table.value[t][x]) << ","
                << (t < K ? model.control_label(table.witness[t][x]) : "") << "\n";
    }
    j.end_array();
    j.end_object();
    ctx.emit("value.csv", csv.str());
    ctx.emit_json("value.json", j);
    return kExitOk;
}

int cmd_recovery(const Context& ctx) {
    const auto& model = ctx.model();
    const StateSet& a = acceptable_of(ctx.file.regime, "recovery");
    const int K = model.horizon();
    int deadline = K;
    if (const auto* r = std::get_if<RobustRecovery>(&ctx.file.regime)) deadline = r->deadline;
    if (ctx.opts.has_deadline) deadline = ctx.opts.deadline;
    const RecoveryTable table = robust_recovery_table(model, a, deadline);

    std::ostringstream csv;
    csv << "t,state,offset,witness\n";
    JsonWriter j;
    header(j, "recovery", ctx);
    j.key("acceptable").strings(state_labels(model, a));
    j.key("deadline").value(deadline);
    j.key("r_star").begin_array();
    for (Index x = 0; x < model.num_states(); ++x) {
        j.begin_object();
        j.key("state").value(model.state_label(x));
        if (table.r_star[x]) {
            j.key("r_star").value(*table.r_star[x]);
        } else {
            j.key("r_star").null();
        }
        j.end_object();
    }
    j.end_array();
    j.key("layers").begin_array();
    for (int t = 0; t <= K; ++t) {
        j.begin_object();
        j.key("t").value(t);
        j.key("offset").begin_array();
        for (const auto& k : table.offset[t]) {
            if (k) {
                j.value(*k);
            } else {
                j.null();
            }
        }
        j.end_array();
        j.key("resilient").strings(state_labels(model, table.resilient(t)));
        if (t < K) {
            j.key("witness").strings(control_labels(model, table.witness[t]));
        } else {
            j.key("witness").null();
        }
        j.end_object();
        for (Index x = 0; x < model.num_states(); ++x)
            csv << t << "," << model.state_label(x) << "," << optional_int(table.offset[t][x]) << ","
                << (t < K ? model.control_label(table.witness[t][x]) : "") << "\n";
    }
    j.end_array();
    j.end_object();
    ctx.emit("recovery.csv", csv.str());
    ctx.emit_json("recovery.json", j);
    return kExitOk;
}

int cmd_resilient_set(const Context& ctx) {
    const auto& model = ctx.model();
    const int t = ctx.time();
    const ResilientSet set = resilient_states(model, t, ctx.file.regime, ctx.strategy_class(), ctx.search());

    std::ostringstream csv;
    csv << "state,member\n";
    for (Index x = 0; x < model.num_states(); ++x)
        csv << model.state_label(x) << "," << (set.states.contains(x) ? 1 : 0) << "\n";

    JsonWriter j;
    header(j, "resilient-set", ctx);
    j.key("t").value(t);
    j.key("class").value(to_string(ctx.strategy_class()));
    j.key("certificate").value(to_string(set.certificate));
    j.key("states").strings(state_labels(model, set.states));
    bool resilient = !set.states.empty();
    if (ctx.opts.has_x0) {
        const Index x0 = ctx.x0();
        resilient = set.states.contains(x0);
        j.key("x0").value(model.state_label(x0));
        j.key("resilient").value(resilient);
        if (resilient) ctx.emit("witness.txt", serialize_strategy(model, *set.witnesses[x0]));
    }
    j.end_object();
    ctx.emit("resilient_set.csv", csv.str());
    ctx.emit_json("resilient_set.json", j);
    return resilient ? kExitOk : kExitNotResilient;
}

int cmd_optimize(const Context& ctx, bool indicator) {
    const auto& model = ctx.model();
    const RiskMeasureSpec& risk = require_risk(ctx, indicator ? "indicator" : "optimize");
    const Index x0 = ctx.x0();
    const int t = ctx.time();
    OptimizeOptions options;
    static_cast<SearchOptions&>(options) = ctx.search();
    const auto result = minimize_risk(model, x0, t, ctx.file.regime, risk, ctx.strategy_class(), options);

    JsonWriter j;
    header(j, indicator ? "indicator" : "optimize", ctx);
    j.key("risk").value(risk_name(risk));
    j.key("x0").value(model.state_label(x0));
    j.key("t").value(t);
    j.key("class").value(to_string(result.strategy_class));
    j.key("resilient").value(result.resilient);
    j.key(indicator ? "indicator" : "value");
    if (result.resilient) {
        j.value(result.value);
    } else {
        j.null();
    }
    j.key("certificate").value(to_string(result.certificate));
    j.key("examined").value(result.examined);
    j.end_object();
    if (!indicator && result.strategy) ctx.emit("strategy.txt", serialize_strategy(model, *result.strategy));
    ctx.emit_json(indicator ? "indicator.json" : "optimize.json", j);
    return result.resilient ? kExitOk : kExitNotResilient;
}

int cmd_simulate(const Context& ctx) {
    const auto& model = ctx.model();
    const Index x0 = ctx.x0();
    const int t = ctx.time();
    const Strategy strategy = ctx.strategy().with_start(t);
    const auto bundle = build_bundle(model, strategy, x0, t, ctx.opts.robust_only);
    const int K = model.horizon();

    std::ostringstream csv;
    csv << "scenario,weight,t,state,control,uncertainty\n";
    for (std::size_t i = 0; i < bundle.trajectories.size(); ++i) {
        const auto& traj = bundle.trajectories[i];
        const std::string weight = model.has_probabilities() ? format_double(model.scenario_weight(traj.scenario)) : "";
        for (int s = t; s <= K; ++s) {
            csv << i << "," << weight << "," << s << "," << model.state_label(traj.state_at(s)) << ",";
            if (s < K) csv << model.control_label(traj.control_at(s)) << "," << model.uncertainty_label(s, traj.scenario[s]);
            else csv << ",";
            csv << "\n";
        }
    }

    const bool satisfied = check_resilient(model, strategy, x0, t, ctx.file.regime);
    JsonWriter j;
    header(j, "simulate", ctx);
    j.key("x0").value(model.state_label(x0));
    j.key("t").value(t);
    j.key("domain").value(ctx.opts.robust_only ? "robust" : "full");
    j.key("scenarios").value(static_cast<std::uint64_t>(bundle.trajectories.size()));
    j.key("regime_satisfied").value(satisfied);
    if (ctx.file.risk) {
        const auto risk_bundle =
            build_bundle(model, strategy, x0, t, required_domain(*ctx.file.risk) == Domain::Robust);
        j.key("risk").value(risk_name(*ctx.file.risk));
        j.key("risk_value").value(evaluate_risk(model, *ctx.file.risk, risk_bundle));
    }
    j.end_object();
    ctx.emit("trajectories.csv", csv.str());
    ctx.emit_json("simulate.json", j);
    return kExitOk;
}

int cmd_oracle(const Context& ctx) {
    const auto& model = ctx.model();
    const int t = ctx.time();
    const StrategyClass cls = ctx.strategy_class();
    const SearchOptions search = ctx.search();
    const StateSet resilient = oracle::resilient_states(model, t, ctx.file.regime, cls, search);
    const StateSet* a = maybe_acceptable(ctx.file.regime);

    JsonWriter j;
    header(j, "oracle", ctx);
    j.key("t").value(t);
    j.key("class").value(to_string(cls));
    j.key("resilient_states").strings(state_labels(model, resilient));

    std::vector<Index> starts;
    if (ctx.opts.has_x0) {
        starts.push_back(ctx.x0());
    } else {
        for (Index x = 0; x < model.num_states(); ++x) starts.push_back(x);
    }
    j.key("states").begin_array();
    for (Index x : starts) {
        j.begin_object();
        j.key("state").value(model.state_label(x));
        j.key("resilient").value(resilient.contains(x));
        if (a && model.has_probabilities())
            j.key("max_viability_probability").value(oracle::max_viability_probability(model, x, t, *a, cls, search));
        if (a) {
            const auto r = oracle::min_max_recovery_time(model, x, t, *a, cls, search);
            j.key("min_max_recovery_time");
            if (r) {
                j.value(*r);
            } else {
                j.null();
            }
        }
        if (ctx.file.risk) {
            const double v = oracle::min_risk(model, x, t, ctx.file.regime, *ctx.file.risk, cls, search);
            j.key("min_risk");
            if (std::isinf(v)) {
                j.null();
            } else {
                j.value(v);
            }
        }
        j.end_object();
    }
    j.end_array();

    if (ctx.opts.has_strategy) {
        if (!ctx.opts.has_x0) throw InputError("oracle --strategy needs --x0");
        const Index x0 = ctx.x0();
        const Strategy strategy = ctx.strategy().with_start(t);
        // Direct evaluation by simulation over every scenario.
        const bool robust_regime = required_domain(ctx.file.regime) == Domain::Robust;
        const auto bundle = build_bundle(model, strategy, x0, t, robust_regime);
        j.key("strategy").begin_object();
        j.key("resilient").value(regime_membership(model, ctx.file.regime, bundle));
        if (ctx.file.risk) {
            const bool robust_risk = required_domain(*ctx.file.risk) == Domain::Robust;
            j.key("risk").value(evaluate_risk(model, *ctx.file.risk, build_bundle(model, strategy, x0, t, robust_risk)));
        }
        j.end_object();
    }
    j.end_object();
    ctx.emit_json("oracle.json", j);
    return kExitOk;
}

// ---- flag wiring ------------------------------------------------------------

enum Flag : unsigned {
    kOut = 1u << 0,
    kStrategy = 1u << 1,
    kX0 = 1u << 2,
    kTime = 1u << 3,
    kClass = 1u << 4,
    kDeadline = 1u << 5,
    kBeta = 1u << 6,
    kAlpha = 1u << 7,
    kCap = 1u << 8,
    kRobustOnly = 1u << 9,
    kThreads = 1u << 10,
    kOverrides = kDeadline | kBeta | kAlpha,
    kSearch = kClass | kCap | kThreads,
};

struct Command {
    const char* name;
    const char* help;
    unsigned flags;
    unsigned required;
    std::function<int(const Context&)> fn;
};

CLI::App* add_command(CLI::App& app, const Command& c, Options& o) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--model", o.model, "model file")->required();
    if (c.flags & kOut) sub->add_option("--out", o.out, "output directory");
    if (c.flags & kStrategy) {
        auto* opt = sub->add_option("--strategy", o.strategy, "strategy file");
        if (c.required & kStrategy) opt->required();
    }
    if (c.flags & kX0) {
        auto* opt = sub->add_option("--x0", o.x0, "initial state label");
        if (c.required & kX0) opt->required();
    }
    if (c.flags & kTime) sub->add_option("--t", o.t, "start time (default 0)");
    if (c.flags & kClass)
        sub->add_option("--class", o.strategy_class, "strategy class")->check(CLI::IsMember({"markov", "adapted"}));
    if (c.flags & kDeadline) sub->add_option("--deadline", o.deadline, "recovery deadline (absolute time)");
    if (c.flags & kBeta) sub->add_option("--beta", o.beta, "probability level");
    if (c.flags & kAlpha) sub->add_option("--alpha", o.alpha, "risk threshold");
    if (c.flags & kCap) sub->add_option("--cap", o.cap, "strategy enumeration cap")->check(CLI::PositiveNumber);
    if (c.flags & kThreads) sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    if (c.flags & kRobustOnly) sub->add_flag("--robust-only", o.robust_only, "simulate robust scenarios only");
    return sub;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Resilience analysis of finite controlled systems under uncertainty", "resil"};
    app.require_subcommand(1, 1);
    app.failure_message(CLI::FailureMessage::help);

    const std::vector<Command> commands{
        {"check", "Check one strategy against the regime", kOut | kStrategy | kX0 | kTime | kOverrides,
         kStrategy | kX0, cmd_check},
        {"kernel", "Robust viability kernel of the regime's acceptable set", kOut, 0, cmd_kernel},
        {"value", "Maximal viability probability per time and state", kOut | kTime | kBeta, 0, cmd_value},
        {"recovery", "Min-max recovery offsets and r*", kOut | kDeadline, 0, cmd_recovery},
        {"resilient-set", "Resilient states at time t", kOut | kX0 | kTime | kSearch | kOverrides, 0,
         cmd_resilient_set},
        {"optimize", "Least-risk resilient strategy", kOut | kX0 | kTime | kSearch | kOverrides, kX0,
         [](const Context& c) { return cmd_optimize(c, false); }},
        {"indicator", "Resilience indicator (minimal risk; null when not resilient)",
         kOut | kX0 | kTime | kSearch | kOverrides, kX0, [](const Context& c) { return cmd_optimize(c, true); }},
        {"simulate", "Closed-loop trajectories of a strategy", kOut | kStrategy | kX0 | kTime | kRobustOnly | kOverrides,
         kStrategy | kX0, cmd_simulate},
        {"oracle", "Brute-force reference values", kOut | kStrategy | kX0 | kTime | kSearch | kOverrides, 0,
         cmd_oracle},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) subs.emplace_back(add_command(app, c, o), &c);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    for (const auto& [sub, command] : subs) {
        if (!sub->parsed()) continue;
        const auto given = [sub = sub](const char* name) {
            const CLI::Option* opt = sub->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        o.has_deadline = given("--deadline");
        o.has_beta = given("--beta");
        o.has_alpha = given("--alpha");
        o.has_x0 = given("--x0");
        o.has_strategy = given("--strategy");
        try {
            ModelFile file = load_model(o.model);
            apply_overrides(file.regime, o);
            validate(file.model, file.regime);
            const Context ctx{o, std::move(file), out};
            return command->fn(ctx);
        } catch (const CapacityError& e) {
            err << "error: " << e.what() << "\n";
            return kExitInputError;
        } catch (const ConfigurationError& e) {
            err << "error: " << e.what() << "\n";
            return kExitInputError;
        } catch (const InputError& e) {
            err << "error: " << e.what() << "\n";
            return kExitInputError;
        } catch (const std::filesystem::filesystem_error& e) {
            err << "error: " << e.what() << "\n";
            return kExitInputError;
        }
    }
    return kExitInputError;
}

}  // namespace resil
