#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace defer {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values (non-finite input, dimension mismatch, out-of-range).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A linear system has no unique solution. Raised by the unregularized MLE
// when the design does not span; the fix is to set ridge > 0.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap. Carries the final gradient norm.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double gradient_norm)
      : Error(msg), gradient_norm_(gradient_norm) {}
  double gradient_norm() const { return gradient_norm_; }

 private:
  double gradient_norm_;
};

// An operation was called in the wrong lifecycle phase.
class StateError : public Error {
 public:
  using Error::Error;
};

// Feedback contents inconsistent with the configured observation mode.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A data file failed to parse. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A dataset file contained no rows.
class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

// An environment ran out of rounds before the horizon. Carries the number of
// rounds that completed.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& msg, std::int64_t rounds_completed)
      : Error(msg), rounds_completed_(rounds_completed) {}
  std::int64_t rounds_completed() const { return rounds_completed_; }

 private:
  std::int64_t rounds_completed_;
};

// An instance is outside the supported solver ranges.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment or policy configuration, detected before any computation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Trace files with incompatible configurations were mixed in one aggregation.
class AggregationError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during numerical optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The spend ledger would exceed the budget; indicates a misconfigured
// budget guard (the guard must dominate the maximum per-round cost).
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace defer
