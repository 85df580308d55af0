#pragma once

#include <stdexcept>
#include <string>

namespace relsim {

// Configuration / validation failure. Messages carry the offending field path
// (e.g. "sus.p0: must be in (0,1)").
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A limit-state evaluator could not produce a value (bad input, subprocess died).
class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Kernel matrix could not be factorized (not positive definite).
class FactorizationError : public std::runtime_error {
public:
    explicit FactorizationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Surrogate fitting failed after all recovery attempts.
class FittingError : public std::runtime_error {
public:
    explicit FittingError(const std::string& msg) : std::runtime_error(msg) {}
};

// Network training diverged.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace relsim
