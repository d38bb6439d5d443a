#pragma once

#include <stdexcept>
#include <string>

namespace ordino {

// Bad input from the caller: malformed files, out-of-range indices, invalid
// configurations. The CLI maps these to exit status 1.
class UserError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: non-convergence, singular information, incoherent
// structures where a coherent one is required. The CLI maps these to exit 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ordino
