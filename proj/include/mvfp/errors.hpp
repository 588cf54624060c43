#pragma once

#include <stdexcept>
#include <string>

namespace mvfp {

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GridMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CflViolation : std::runtime_error {
    CflViolation(const std::string& what, double admissible)
        : std::runtime_error(what), admissible_dt(admissible) {}
    double admissible_dt;
};

struct NegativityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double last)
        : std::runtime_error(what), last_residual(last) {}
    double last_residual;
};

struct BlowUpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mvfp
