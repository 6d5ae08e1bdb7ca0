#include "resilience/enumeration.hpp"

#include <string>

namespace resilience {

StrategyEnumeration::StrategyEnumeration(const SystemModel& model, StrategyClass strategy_class, int start,
                                         std::uint64_t cap)
    : model_(&model), class_(strategy_class), start_(start) {
    if (start < 0 || start > model.horizon()) throw InputError("start time out of range");
    for (int s = start; s < model.horizon(); ++s) {
        const std::uint64_t prefixes = strategy_class == StrategyClass::Adapted ? prefix_count(model, s) : 1;
        if (prefixes == UINT64_MAX || saturating_mul(prefixes, model.num_states()) > cap)
            throw CapacityError(std::string(to_string(strategy_class)) + " strategies", UINT64_MAX, cap);
        for (Index x = 0; x < model.num_states(); ++x)
            for (std::uint64_t p = 0; p < prefixes; ++p) {
                const auto radix = static_cast<std::uint32_t>(model.allowed_controls(s, x).size());
                nodes_.push_back({s, x, p, radix});
                size_ = saturating_mul(size_, radix);
            }
    }
    if (size_ > cap) throw CapacityError(std::string(to_string(strategy_class)) + " strategies", size_, cap);
}

std::vector<std::uint32_t> StrategyEnumeration::decode(std::uint64_t rank) const {
    if (rank >= size_) throw InputError("strategy rank out of range");
    std::vector<std::uint32_t> digits(nodes_.size(), 0);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        digits[i] = static_cast<std::uint32_t>(rank % nodes_[i].radix);
        rank /= nodes_[i].radix;
    }
    return digits;
}

Strategy StrategyEnumeration::at(std::uint64_t rank) const { return build(decode(rank)); }

Strategy StrategyEnumeration::build(const std::vector<std::uint32_t>& digits) const {
    const SystemModel& model = *model_;
    const std::size_t nx = model.num_states();
    std::vector<Policy> policies;
    policies.reserve(static_cast<std::size_t>(model.horizon()));
    std::size_t node = 0;
    for (int s = 0; s < model.horizon(); ++s) {
        if (s < start_) {
            std::vector<Index> table(nx);
            for (Index x = 0; x < nx; ++x) table[x] = model.allowed_controls(s, x).front();
            policies.push_back(Policy::markovian(s, std::move(table)));
            continue;
        }
        const std::uint64_t prefixes = class_ == StrategyClass::Adapted ? prefix_count(model, s) : 1;
        std::vector<Index> table(nx * prefixes);
        for (std::size_t i = 0; i < table.size(); ++i, ++node) {
            const Node& n = nodes_[node];
            table[i] = model.allowed_controls(n.time, n.state)[digits[node]];
        }
        if (class_ == StrategyClass::Adapted)
            policies.push_back(Policy::adapted(s, nx, prefixes, std::move(table)));
        else
            policies.push_back(Policy::markovian(s, std::move(table)));
    }
    return Strategy(std::move(policies), start_);
}

}  // namespace resilience
