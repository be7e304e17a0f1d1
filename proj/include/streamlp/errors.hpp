#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamlp {

struct Location {
    std::size_t line = 0;
    std::size_t column = 0;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax or safety error in an encoding or stream block, with a source position.
class ParseError : public Error {
public:
    ParseError(Location loc, const std::string& msg)
        : Error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + msg), loc_(loc) {}
    Location location() const { return loc_; }

private:
    Location loc_;
};

class ResolveError : public Error {
public:
    using Error::Error;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class GroundingError : public Error {
public:
    using Error::Error;
};

/// An atom would be defined by more than one slice.
class ModularityError : public GroundingError {
public:
    using GroundingError::GroundingError;
};

/// Violation of the online stream protocol (order, undeclared inputs, forget misuse).
class StreamError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace streamlp
