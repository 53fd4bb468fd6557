#ifndef BNMC_ERRORS_HPP
#define BNMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bnmc {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (files, flags that name data).
class InputError : public Error {
public:
    using Error::Error;
};

// Bad arguments to an operation; the CLI maps these to its usage exit code.
class UsageError : public Error {
public:
    using Error::Error;
};

class GraphError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace bnmc

#endif  // BNMC_ERRORS_HPP
