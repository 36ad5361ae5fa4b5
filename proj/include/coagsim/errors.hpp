#pragma once

#include <stdexcept>
#include <string>

namespace coagsim {

// Domain and usage violations throw std::invalid_argument.
// Numerical failures (quadrature, overflow, collapse) throw NumericalError.

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double achieved)
        : NumericalError(what), achieved_error(achieved) {}
    double achieved_error;
};

// The iteration landed on the trivial fixed point h == 0.
class CollapseError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace coagsim
