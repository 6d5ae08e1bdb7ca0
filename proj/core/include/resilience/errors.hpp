#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace resilience {

/// Malformed or out-of-range input: bad indices, shape mismatches, invalid parameters.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The model lacks something an operation needs (for example probabilities).
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An enumeration would exceed its configured cap.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what_enumerated, std::uint64_t required, std::uint64_t cap)
        : std::runtime_error(what_enumerated + ": " + std::to_string(required) +
                             " required, cap is " + std::to_string(cap)),
          required_(required), cap_(cap) {}

    /// Saturates at UINT64_MAX when the true count overflows.
    std::uint64_t required() const noexcept { return required_; }
    std::uint64_t cap() const noexcept { return cap_; }

private:
    std::uint64_t required_;
    std::uint64_t cap_;
};

}  // namespace resilience
