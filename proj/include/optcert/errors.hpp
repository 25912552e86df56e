#pragma once

#include <stdexcept>
#include <string>

namespace optcert {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input: bad dimensions, unparseable rationals, unknown fields.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

// A documented precondition does not hold (e.g. base point infeasible).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(what) {}
};

// A derivative was requested at a kink / junction and no annotation applies.
class NonsmoothError : public Error {
public:
    explicit NonsmoothError(const std::string& what) : Error(what) {}
};

// Evaluation is undefined at the requested point (no piecewise guard matched,
// reciprocal of zero, ...).
class UndefinedError : public Error {
public:
    explicit UndefinedError(const std::string& what) : Error(what) {}
};

} // namespace optcert
