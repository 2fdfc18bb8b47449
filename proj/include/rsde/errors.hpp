#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rsde {

/// Invalid or inconsistent user configuration (bad dimensions, unknown keys,
/// violated preconditions such as the penalization stiffness rule).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The model itself violates a structural assumption (invalid measure,
/// singular diffusion, failed dissipativity).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Too few samples or otherwise degenerate statistics.
class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulated state became non-finite or exceeded the blowup guard.
class SimulationBlowup : public std::runtime_error {
public:
    SimulationBlowup(std::size_t step, const std::string& what)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace rsde
