#pragma once

#include <stdexcept>
#include <string>

namespace evcalc {

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Structural problems: malformed frames, weights that do not sum to 1,
/// frame mismatches, invalid instances.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Evidence-file syntax or schema problems.
class ParseError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Conditioning on a set of probability zero.
class ConditioningError : public Error {
public:
  using Error::Error;
};

/// The structure is not combinable (every product tuple is contradictory
/// or carries a zero factor), or a mass combination is totally conflicting.
class CombinabilityError : public Error {
public:
  using Error::Error;
};

/// Product space larger than the configured cap. Message names the cardinality.
class CapError : public Error {
public:
  using Error::Error;
};

/// The random-instance generator exhausted its resample budget.
class GeneratorError : public Error {
public:
  using Error::Error;
};

/// A requested test instance cannot be built (e.g. conflicting certain
/// evidence where the construction forbids conflict).
class InstanceInvalidError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

}  // namespace evcalc
