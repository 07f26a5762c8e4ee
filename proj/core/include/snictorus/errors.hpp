#pragma once

#include <stdexcept>
#include <string>

#include "snictorus/geometry.hpp"

namespace snic {

/// Base for failures of a numerical method (as opposed to bad arguments).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Step-size underflow: the orbit hit a singularity or a stiff region.
class StiffnessError : public NumericalError {
public:
    StiffnessError(const std::string& what, double t, Vec2 state)
        : NumericalError(what), last_time(t), last_state(state) {}
    double last_time;
    Vec2 last_state;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Root bracket without a sign change.
class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A traced separatrix branch never reached the requested section.
class BranchCrossingError : public NumericalError {
public:
    BranchCrossingError(const std::string& what, char branch) : NumericalError(what), branch_label(branch) {}
    char branch_label;
};

/// Argument outside an operation's domain.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace snic
