#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "resilience/model.hpp"
#include "resilience/strategy.hpp"

namespace resilience {

inline constexpr std::uint64_t kDefaultStrategyCap = 1'000'000;

struct SearchOptions {
    /// Hard limit on the number of enumerated strategies.
    std::uint64_t strategy_cap = kDefaultStrategyCap;
    std::uint64_t scenario_cap = kDefaultScenarioCap;
    /// Worker threads for enumeration; results do not depend on this.
    unsigned threads = 1;
};

/// All admissible strategies of a class that differ from `start` on, in
/// lexicographic order of their control tables. Decision nodes are
/// (s, x) for Markovian strategies and (s, x, prefix) for adapted ones,
/// s = start..K-1; the last node varies fastest. Policies before `start`
/// play the smallest admissible control.
class StrategyEnumeration {
public:
    StrategyEnumeration(const SystemModel& model, StrategyClass strategy_class, int start, std::uint64_t cap);

    std::uint64_t size() const noexcept { return size_; }
    StrategyClass strategy_class() const noexcept { return class_; }

    Strategy at(std::uint64_t rank) const;

    /// Calls fn(rank, strategy) for rank in [begin, end) in order; stops early
    /// when fn returns false.
    template <class Fn>
    void for_each(std::uint64_t begin, std::uint64_t end, Fn&& fn) const {
        if (begin >= end) return;
        std::vector<std::uint32_t> digits = decode(begin);
        for (std::uint64_t rank = begin; rank < end; ++rank) {
            if (!fn(rank, build(digits))) return;
            for (std::size_t i = digits.size(); i-- > 0;) {
                if (++digits[i] < nodes_[i].radix) break;
                digits[i] = 0;
            }
        }
    }

private:
    struct Node {
        int time;
        Index state;
        std::uint64_t prefix;
        std::uint32_t radix;
    };

    std::vector<std::uint32_t> decode(std::uint64_t rank) const;
    Strategy build(const std::vector<std::uint32_t>& digits) const;

    const SystemModel* model_;
    StrategyClass class_;
    int start_;
    std::vector<Node> nodes_;
    std::uint64_t size_ = 1;
};

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) on up to
/// `threads` workers.
template <class Fn>
void parallel_chunks(std::uint64_t n, unsigned threads, Fn&& fn) {
    const std::uint64_t workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, n));
    if (workers <= 1) {
        fn(std::uint64_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::uint64_t i = 0; i < workers; ++i) {
            const std::uint64_t b = n * i / workers;
            const std::uint64_t e = n * (i + 1) / workers;
            pool.emplace_back([&fn, &errors, i, b, e] {
                try {
                    fn(b, e);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace resilience
