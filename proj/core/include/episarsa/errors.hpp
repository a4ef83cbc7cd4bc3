#pragma once

#include <stdexcept>
#include <string>

namespace episarsa {

/// A modelling assumption required by the algorithm does not hold
/// (improper policy, missing soft-policy floor, indefinite TD matrix, ...).
class AssumptionError : public std::runtime_error {
public:
    explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

/// A numeric procedure failed (solver residual too large, divergence,
/// non-finite weights, iteration budget exhausted).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Input files or configuration documents that cannot be parsed.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace episarsa
