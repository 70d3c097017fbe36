#pragma once

#include <stdexcept>
#include <string>

namespace cfmec {

// Invalid configuration values; raised eagerly by the config constructors.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical kernel failed to converge or lost too much accuracy.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A queue is driven at utilization >= 1.
class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Derived quantities disagree with an identity they must satisfy.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The requested SECP target cannot be reached by any (R, theta).
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double achievable)
        : std::runtime_error(what), achievable_(achievable) {}

    double achievable() const noexcept { return achievable_; }

private:
    double achievable_;
};

}  // namespace cfmec
