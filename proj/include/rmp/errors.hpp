#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmp {

// Malformed configuration (files, scenario blocks, CLI input). line/col are
// 1-based when the error came from a parsed document, 0 otherwise.
struct ConfigError : std::runtime_error {
    int line = 0;
    int col = 0;
    ConfigError(const std::string& msg, int line_ = 0, int col_ = 0)
        : std::runtime_error(line_ > 0 ? msg + " (line " + std::to_string(line_) + ", col " +
                                             std::to_string(col_) + ")"
                                       : msg),
          line(line_),
          col(col_) {}
};

// Point outside the domain box, invalid bounds, invalid basis construction.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A quadrature denominator was non-positive at a node that carries weight.
struct InfeasibleDenominator : std::runtime_error {
    std::size_t node = 0;
    double q_value = 0.0;
    InfeasibleDenominator(const std::string& msg, std::size_t node_, double q_value_)
        : std::runtime_error(msg + " (node " + std::to_string(node_) +
                             ", denominator value " + std::to_string(q_value_) + ")"),
          node(node_),
          q_value(q_value_) {}
};

// Newton system condition estimate exceeded the configured limit and
// regularization failed to produce progress.
struct IllConditionedError : std::runtime_error {
    double condition = 0.0;
    IllConditionedError(const std::string& msg, double condition_)
        : std::runtime_error(msg), condition(condition_) {}
};

// Atomic recovery could not reproduce the target moments.
struct RecoveryError : std::runtime_error {
    double residual = 0.0;
    RecoveryError(const std::string& msg, double residual_)
        : std::runtime_error(msg), residual(residual_) {}
};

}  // namespace rmp
