#pragma once

#include <stdexcept>
#include <string>

namespace twinsim {

// Base class for all engine errors. The CLI maps anything derived from
// Error to exit code 1 (bad input / failed validation); any other
// exception escaping to main is an internal error (exit code 2).
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Vector/matrix shapes do not line up.
class DimensionError : public Error {
public:
  using Error::Error;
};

// A step or window index falls outside the covered range.
class RangeError : public Error {
public:
  using Error::Error;
};

// A parameter value is out of its admissible set (k < 2, empty input...).
class ParameterError : public Error {
public:
  using Error::Error;
};

// A document could not be parsed; message carries line/coordinate info.
class ParseError : public Error {
public:
  using Error::Error;
};

// A cross-reference failed to resolve (unknown variable, missing cost row).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Two reports are not comparable (different k or variable universe).
class ComparisonError : public Error {
public:
  using Error::Error;
};

// Streamed rows arrived out of order.
class SequencingError : public Error {
public:
  using Error::Error;
};

// A budget (grid size, action count, horizon) was exceeded.
class ResourceError : public Error {
public:
  using Error::Error;
};

}  // namespace twinsim
