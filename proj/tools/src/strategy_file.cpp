#include "resil/strategy_file.hpp"

#include <charconv>
#include <sstream>

#include "resil/model_file.hpp"

namespace resil {

using namespace resilience;

namespace {

struct Row {
    int line;
    bool adapted;
    Index state;
    std::uint64_t prefix;
    Index control;
};

int parse_int(const std::string& token, const std::string& where) {
    int v = 0;
    const char* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InputError(where + "expected an integer, got '" + token + "'");
    return v;
}

}  // namespace

Strategy parse_strategy(const SystemModel& model, std::string_view text, std::string_view source) {
    const int K = model.horizon();
    const std::size_t nx = model.num_states();
    int start = 0;
    bool have_start = false;
    std::vector<std::vector<Row>> rows(static_cast<std::size_t>(K));

    std::istringstream in{std::string(text)};
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const std::string where = std::string(source) + ":" + std::to_string(number) + ": ";
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream words(raw);
        std::vector<std::string> tok;
        for (std::string w; words >> w;) tok.push_back(w);
        if (tok.empty()) continue;
        if (tok[0] == "start") {
            if (tok.size() != 2 || have_start) throw InputError(where + "expected a single 'start <t>' line");
            start = parse_int(tok[1], where);
            if (start < 0 || start > K) throw InputError(where + "start time outside 0.." + std::to_string(K));
            have_start = true;
            continue;
        }
        if (tok.size() != 5) throw InputError(where + "expected: <t> markov|adapted <state> <prefix> <control>");
        const int t = parse_int(tok[0], where);
        if (t < 0 || t >= K) throw InputError(where + "time outside 0.." + std::to_string(K - 1));
        Row row{number, false, 0, 0, 0};
        if (tok[1] == "adapted") {
            row.adapted = true;
        } else if (tok[1] != "markov") {
            throw InputError(where + "policy kind must be markov or adapted, got '" + tok[1] + "'");
        }
        const auto x = model.find_state(tok[2]);
        if (!x || *x >= nx) throw InputError(where + "unknown state '" + tok[2] + "'");
        row.state = *x;
        const auto u = model.find_control(tok[4]);
        if (!u) throw InputError(where + "unknown control '" + tok[4] + "'");
        row.control = *u;
        if (row.adapted) {
            std::vector<Index> prefix;
            if (tok[3] != "-") {
                std::string label;
                std::istringstream parts(tok[3]);
                while (std::getline(parts, label, ',')) {
                    const int s = static_cast<int>(prefix.size());
                    if (s >= t) throw InputError(where + "prefix longer than the time index");
                    const auto w = model.find_uncertainty(s, label);
                    if (!w) throw InputError(where + "unknown uncertainty '" + label + "' at time " + std::to_string(s));
                    prefix.push_back(*w);
                }
            }
            if (static_cast<int>(prefix.size()) != t)
                throw InputError(where + "prefix must list " + std::to_string(t) + " uncertainty labels");
            row.prefix = prefix_rank(model, prefix, t);
        } else if (tok[3] != "-") {
            throw InputError(where + "markov rows take '-' as prefix");
        }
        rows[t].push_back(row);
    }

    std::vector<Policy> policies;
    for (int t = 0; t < K; ++t) {
        bool adapted = false;
        for (const auto& r : rows[t]) adapted = adapted || r.adapted;
        const std::uint64_t prefixes = adapted ? prefix_count(model, t) : 1;
        std::vector<Index> table(nx * prefixes, 0);
        std::vector<int> seen(table.size(), 0);
        for (const auto& r : rows[t]) {
            const std::string where = std::string(source) + ":" + std::to_string(r.line) + ": ";
            if (adapted && !r.adapted) throw InputError(where + "time " + std::to_string(t) + " mixes markov and adapted rows");
            const std::size_t slot = r.state * prefixes + r.prefix;
            if (seen[slot]) throw InputError(where + "duplicates line " + std::to_string(seen[slot]));
            seen[slot] = r.line;
            table[slot] = r.control;
        }
        for (std::size_t slot = 0; slot < seen.size(); ++slot)
            if (!seen[slot])
                throw InputError(std::string(source) + ": no control for state '" +
                                 model.state_label(static_cast<Index>(slot / prefixes)) + "' at time " +
                                 std::to_string(t));
        policies.push_back(adapted ? Policy::adapted(t, nx, prefixes, std::move(table))
                                   : Policy::markovian(t, std::move(table)));
    }
    Strategy strategy(std::move(policies), start);
    strategy.check_shape(model);
    return strategy;
}

Strategy load_strategy(const SystemModel& model, const std::filesystem::path& path) {
    return parse_strategy(model, read_file(path), path.string());
}

std::string serialize_strategy(const SystemModel& model, const Strategy& strategy) {
    std::ostringstream out;
    out << "start " << strategy.start_time() << "\n";
    for (const auto& policy : strategy.policies()) {
        const int t = policy.time();
        const bool adapted = policy.kind() == PolicyKind::Adapted;
        for (Index x = 0; x < policy.num_states(); ++x)
            for (std::uint64_t r = 0; r < policy.prefixes(); ++r) {
                out << t << (adapted ? " adapted " : " markov ") << model.state_label(x) << " ";
                if (!adapted || t == 0) {
                    out << "-";
                } else {
                    const auto prefix = prefix_from_rank(model, t, r);
                    for (int s = 0; s < t; ++s) out << (s ? "," : "") << model.uncertainty_label(s, prefix[s]);
                }
                out << " " << model.control_label(policy.control(x, r)) << "\n";
            }
    }
    return out.str();
}

}  // namespace resil
