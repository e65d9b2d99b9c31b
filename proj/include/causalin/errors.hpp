#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace causalin {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input that does not describe a well-formed object (dangling tags,
/// duplicate tags, unmatched responses, ...).
class MalformedInput : public Error {
  public:
    using Error::Error;
};

/// A history or structure with an invocation that never returned, passed
/// to an operation that needs complete input.
class IncompleteHistory : public Error {
  public:
    using Error::Error;
};

/// A label outside the alphabet of the sequential object in use.
class ForeignLabel : public Error {
  public:
    using Error::Error;
};

class PreconditionFailed : public Error {
  public:
    using Error::Error;
};

/// Search refused because it would exceed a configured bound.
class BoundExceeded : public Error {
  public:
    BoundExceeded(const std::string& what, std::size_t offending, std::size_t limit)
        : Error(what + " (" + std::to_string(offending) + " > " +
                std::to_string(limit) + ")"),
          offending(offending), limit(limit)
    {}

    std::size_t offending;
    std::size_t limit;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InvariantViolation : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line(line), column(column)
    {}

    std::size_t line;
    std::size_t column;
};

}  // namespace causalin
