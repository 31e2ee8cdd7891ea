#pragma once

#include <stdexcept>
#include <string>

namespace ctmc {

// Bad input: violated preconditions, malformed configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that was set up correctly but failed to produce a trustworthy
// number (quadrature did not converge, non-finite matrix entries, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ctmc
